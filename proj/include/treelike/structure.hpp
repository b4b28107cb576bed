#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

namespace treelike {

// Relational signature: named symbols with positive arities.
struct Signature {
    std::vector<std::pair<std::string, int>> symbols;

    Signature() = default;
    Signature(std::initializer_list<std::pair<std::string, int>> syms)
        : symbols(syms) {
        validate();
    }
    explicit Signature(std::vector<std::pair<std::string, int>> syms)
        : symbols(std::move(syms)) {
        validate();
    }

    void validate() const {
        std::set<std::string> seen;
        for (const auto& [name, arity] : symbols) {
            if (arity < 1) throw std::invalid_argument("arity must be >= 1: " + name);
            if (!seen.insert(name).second)
                throw std::invalid_argument("duplicate relation symbol: " + name);
        }
    }

    int arity_of(const std::string& name) const {
        for (const auto& [n, a] : symbols)
            if (n == name) return a;
        throw std::invalid_argument("unknown relation symbol: " + name);
    }

    bool has_symbol(const std::string& name) const {
        for (const auto& [n, a] : symbols)
            if (n == name) return true;
        return false;
    }

    bool operator==(const Signature& other) const { return symbols == other.symbols; }
    bool operator!=(const Signature& other) const { return !(*this == other); }
};

// A finite relational structure: ordered universe of named elements plus,
// for each symbol, a set of tuples of element indices. Tuples may repeat
// entries. Immutable in spirit: all operations below are pure.
class FinStructure {
public:
    FinStructure() = default;

    FinStructure(Signature sig, std::vector<std::string> universe)
        : sig_(std::move(sig)), universe_(std::move(universe)) {
        if (universe_.size() > 255)
            throw std::invalid_argument("universe too large (desk scale is <= 255)");
        for (std::size_t i = 0; i < universe_.size(); ++i) {
            if (!index_.emplace(universe_[i], static_cast<int>(i)).second)
                throw std::invalid_argument("duplicate element id: " + universe_[i]);
        }
        for (const auto& [name, arity] : sig_.symbols) rel_[name];
    }

    const Signature& signature() const { return sig_; }
    const std::vector<std::string>& universe() const { return universe_; }
    int size() const { return static_cast<int>(universe_.size()); }

    int index_of(const std::string& id) const {
        auto it = index_.find(id);
        if (it == index_.end())
            throw std::invalid_argument("element not in universe: " + id);
        return it->second;
    }
    bool contains_element(const std::string& id) const { return index_.count(id) > 0; }

    void add_tuple(const std::string& symbol, const std::vector<int>& tuple) {
        const int arity = sig_.arity_of(symbol);
        if (static_cast<int>(tuple.size()) != arity)
            throw std::invalid_argument("tuple arity mismatch for " + symbol);
        for (int e : tuple)
            if (e < 0 || e >= size())
                throw std::invalid_argument("element not in universe");
        rel_.at(symbol).insert(pack(tuple));
    }

    void add_tuple_by_name(const std::string& symbol, const std::vector<std::string>& ids) {
        std::vector<int> t;
        t.reserve(ids.size());
        for (const auto& id : ids) t.push_back(index_of(id));
        add_tuple(symbol, t);
    }

    bool has(const std::string& symbol, const std::vector<int>& tuple) const {
        auto it = rel_.find(symbol);
        if (it == rel_.end()) throw std::invalid_argument("unknown relation symbol: " + symbol);
        return it->second.count(pack(tuple)) > 0;
    }

    bool has_packed(const std::string& symbol, std::uint64_t key) const {
        return rel_.at(symbol).count(key) > 0;
    }

    std::size_t tuple_count(const std::string& symbol) const { return rel_.at(symbol).size(); }

    // Sorted tuple lists, for deterministic serialization and comparison.
    std::vector<std::vector<int>> tuples_sorted(const std::string& symbol) const {
        const int arity = sig_.arity_of(symbol);
        std::vector<std::vector<int>> out;
        out.reserve(rel_.at(symbol).size());
        for (std::uint64_t key : rel_.at(symbol)) out.push_back(unpack(key, arity));
        std::sort(out.begin(), out.end());
        return out;
    }

    bool operator==(const FinStructure& other) const {
        if (sig_ != other.sig_ || universe_ != other.universe_) return false;
        for (const auto& [name, arity] : sig_.symbols)
            if (rel_.at(name) != other.rel_.at(name)) return false;
        return true;
    }
    bool operator!=(const FinStructure& other) const { return !(*this == other); }

    // Arity is fixed per symbol, so byte-packing is collision-free.
    static std::uint64_t pack(const std::vector<int>& tuple) {
        std::uint64_t key = 0;
        for (std::size_t i = 0; i < tuple.size(); ++i)
            key |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(tuple[i])) << (8 * i);
        return key;
    }

    static std::vector<int> unpack(std::uint64_t key, int arity) {
        std::vector<int> t(arity);
        for (int i = 0; i < arity; ++i) t[i] = static_cast<int>((key >> (8 * i)) & 0xff);
        return t;
    }

private:
    Signature sig_;
    std::vector<std::string> universe_;
    std::map<std::string, int> index_;
    std::map<std::string, std::unordered_set<std::uint64_t>> rel_;
};

// Substructure induced on a subset of the universe; element order inherited.
inline FinStructure induced(const FinStructure& s, const std::set<std::string>& subset) {
    std::vector<std::string> new_universe;
    for (const auto& id : subset)
        if (!s.contains_element(id))
            throw std::invalid_argument("element not in universe: " + id);
    for (const auto& id : s.universe())
        if (subset.count(id)) new_universe.push_back(id);

    FinStructure out(s.signature(), new_universe);
    std::vector<int> old_to_new(s.size(), -1);
    for (std::size_t i = 0; i < new_universe.size(); ++i)
        old_to_new[s.index_of(new_universe[i])] = static_cast<int>(i);

    for (const auto& [name, arity] : s.signature().symbols) {
        for (const auto& tuple : s.tuples_sorted(name)) {
            std::vector<int> mapped;
            mapped.reserve(tuple.size());
            bool keep = true;
            for (int e : tuple) {
                if (old_to_new[e] < 0) { keep = false; break; }
                mapped.push_back(old_to_new[e]);
            }
            if (keep) out.add_tuple(name, mapped);
        }
    }
    return out;
}

namespace detail {

// All arity-length tuples over {0..limit-1} that mention `must_contain`,
// visited in lexicographic order.
template <typename Fn>
void for_each_tuple_containing(int limit, int arity, int must_contain, Fn&& fn) {
    std::vector<int> t(arity, 0);
    while (true) {
        bool mentions = false;
        for (int e : t)
            if (e == must_contain) { mentions = true; break; }
        if (mentions) fn(t);
        int i = arity - 1;
        while (i >= 0 && t[i] == limit - 1) t[i--] = 0;
        if (i < 0) break;
        ++t[i];
    }
}

}  // namespace detail

// Injective strong-embedding search: preserves every atom and its negation.
// Returns the image indices in A's universe order, or nullopt. Deterministic
// for fixed element orderings.
inline std::optional<std::vector<int>> find_embedding(const FinStructure& a,
                                                      const FinStructure& b) {
    if (a.signature() != b.signature())
        throw std::invalid_argument("signature mismatch");
    const int n = a.size(), m = b.size();
    if (n > m) return std::nullopt;

    std::vector<int> map(n, -1);
    std::vector<bool> used(m, false);

    // Atoms among a[0..k] that mention a[k] must match atoms of their images.
    auto consistent = [&](int k) {
        for (const auto& [name, arity] : a.signature().symbols) {
            bool ok = true;
            detail::for_each_tuple_containing(k + 1, arity, k, [&](const std::vector<int>& t) {
                if (!ok) return;
                std::vector<int> img(t.size());
                for (std::size_t i = 0; i < t.size(); ++i) img[i] = map[t[i]];
                if (a.has(name, t) != b.has(name, img)) ok = false;
            });
            if (!ok) return false;
        }
        return true;
    };

    auto rec = [&](auto&& self, int k) -> bool {
        if (k == n) return true;
        for (int cand = 0; cand < m; ++cand) {
            if (used[cand]) continue;
            map[k] = cand;
            used[cand] = true;
            if (consistent(k) && self(self, k + 1)) return true;
            used[cand] = false;
            map[k] = -1;
        }
        return false;
    };

    if (rec(rec, 0)) return map;
    return std::nullopt;
}

inline bool is_isomorphic(const FinStructure& a, const FinStructure& b) {
    if (a.signature() != b.signature())
        throw std::invalid_argument("signature mismatch");
    if (a.size() != b.size()) return false;
    return find_embedding(a, b).has_value();
}

// Exact canonical form: lexicographically minimal relational code over all
// vertex orderings, computed level by level. At each level every surviving
// partial ordering is extended by every unplaced vertex; only extensions
// achieving the minimal atom block survive. Exponential on highly symmetric
// inputs, which is fine at desk scale.
inline std::string canonical_code(const FinStructure& s) {
    const int n = s.size();
    std::string header = "FS1|";
    auto symbols = s.signature().symbols;
    std::sort(symbols.begin(), symbols.end());
    for (const auto& [name, arity] : symbols)
        header += name + ":" + std::to_string(arity) + ",";
    header += "|n=" + std::to_string(n) + "|";
    if (n == 0) return header;

    // Atom block contributed by placing vertex `v` at position k of `order`:
    // membership bits of all tuples over positions 0..k that mention k, per
    // symbol, tuples in lexicographic position order.
    auto block_of = [&](const std::vector<int>& order, int v) {
        std::vector<std::uint8_t> bits;
        const int k = static_cast<int>(order.size());
        for (const auto& [name, arity] : symbols) {
            detail::for_each_tuple_containing(k + 1, arity, k, [&](const std::vector<int>& t) {
                std::vector<int> actual(t.size());
                for (std::size_t i = 0; i < t.size(); ++i)
                    actual[i] = t[i] == k ? v : order[t[i]];
                bits.push_back(s.has(name, actual) ? 1 : 0);
            });
        }
        return bits;
    };

    std::vector<std::vector<int>> active = {{}};
    std::vector<std::uint8_t> all_bits;
    for (int k = 0; k < n; ++k) {
        std::vector<std::uint8_t> best;
        std::vector<std::vector<int>> next;
        bool have_best = false;
        for (const auto& order : active) {
            std::vector<bool> placed(n, false);
            for (int v : order) placed[v] = true;
            for (int v = 0; v < n; ++v) {
                if (placed[v]) continue;
                auto bits = block_of(order, v);
                const int cmp = !have_best ? -1
                                           : (bits < best ? -1 : (bits == best ? 0 : 1));
                if (cmp > 0) continue;
                if (cmp < 0) {
                    best = std::move(bits);
                    have_best = true;
                    next.clear();
                }
                auto extended = order;
                extended.push_back(v);
                next.push_back(std::move(extended));
            }
        }
        all_bits.insert(all_bits.end(), best.begin(), best.end());
        active = std::move(next);
    }

    // Pack bits into bytes for a compact, platform-stable code.
    std::string code = header;
    std::uint8_t acc = 0;
    int fill = 0;
    for (std::uint8_t bit : all_bits) {
        acc = static_cast<std::uint8_t>((acc << 1) | bit);
        if (++fill == 8) {
            code.push_back(static_cast<char>(acc));
            acc = 0;
            fill = 0;
        }
    }
    if (fill > 0) code.push_back(static_cast<char>(acc << (8 - fill)));
    return code;
}

inline nlohmann::json to_json(const FinStructure& s) {
    nlohmann::json sig = nlohmann::json::array();
    for (const auto& [name, arity] : s.signature().symbols)
        sig.push_back(nlohmann::json::array({name, arity}));
    nlohmann::json relations = nlohmann::json::object();
    for (const auto& [name, arity] : s.signature().symbols) {
        nlohmann::json tuples = nlohmann::json::array();
        for (const auto& t : s.tuples_sorted(name)) {
            nlohmann::json row = nlohmann::json::array();
            for (int e : t) row.push_back(s.universe()[e]);
            tuples.push_back(row);
        }
        relations[name] = tuples;
    }
    return nlohmann::json{{"signature", sig},
                          {"universe", s.universe()},
                          {"relations", relations}};
}

inline FinStructure fin_structure_from_json(const nlohmann::json& j) {
    std::vector<std::pair<std::string, int>> syms;
    for (const auto& entry : j.at("signature"))
        syms.emplace_back(entry.at(0).get<std::string>(), entry.at(1).get<int>());
    FinStructure out(Signature(syms), j.at("universe").get<std::vector<std::string>>());
    if (j.contains("relations")) {
        for (const auto& [name, tuples] : j.at("relations").items())
            for (const auto& t : tuples)
                out.add_tuple_by_name(name, t.get<std::vector<std::string>>());
    }
    return out;
}

}  // namespace treelike
