#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cdnr/error.hpp"
#include "cdnr/graph.hpp"
#include "cdnr/text.hpp"

namespace cdnr {

inline constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

// A cluster of source nodes with close degrees. The representative degree is
// the mean member degree.
struct SuperNode {
    std::vector<NodeId> members;  // sorted
    double representative_degree = 0.0;
};

// Super nodes kept sorted by representative degree, decreasing. Source nodes
// of degree zero are never clustered.
class SuperNodeSet {
public:
    SuperNodeSet() = default;
    SuperNodeSet(std::vector<SuperNode> supers, std::vector<std::size_t> source_degrees)
        : supers_(std::move(supers)), source_degrees_(std::move(source_degrees)) {
        normalize();
    }

    const std::vector<SuperNode>& supers() const noexcept { return supers_; }
    std::size_t size() const noexcept { return supers_.size(); }
    const SuperNode& operator[](std::size_t i) const { return supers_[i]; }
    const std::vector<std::size_t>& source_degrees() const noexcept { return source_degrees_; }

    // Number of distinct representative degrees.
    std::size_t n_deg_prime() const { return rank_groups().size(); }

    // Super indices grouped by equal representative degree, groups ordered by
    // decreasing degree. Group position is the super node's rank.
    std::vector<std::vector<std::size_t>> rank_groups() const {
        std::vector<std::vector<std::size_t>> groups;
        for (std::size_t i = 0; i < supers_.size(); ++i) {
            if (groups.empty() || supers_[groups.back().front()].representative_degree != supers_[i].representative_degree)
                groups.emplace_back();
            groups.back().push_back(i);
        }
        return groups;
    }

    std::vector<double> distinct_degrees() const {
        std::vector<double> out;
        for (const auto& g : rank_groups()) out.push_back(supers_[g.front()].representative_degree);
        return out;
    }

    // source node -> super index, npos when unclustered.
    std::vector<std::size_t> membership() const {
        std::vector<std::size_t> m(source_degrees_.size(), npos);
        for (std::size_t s = 0; s < supers_.size(); ++s)
            for (NodeId v : supers_[s].members) m[v] = s;
        return m;
    }

    std::size_t member_count() const {
        std::size_t n = 0;
        for (const auto& s : supers_) n += s.members.size();
        return n;
    }

    double mean_degree(const std::vector<NodeId>& members) const {
        if (members.empty()) return 0.0;
        std::size_t sum = 0;
        for (NodeId v : members) sum += source_degrees_.at(v);
        return static_cast<double>(sum) / static_cast<double>(members.size());
    }

    // Merges super `from` into super `into`; indices refer to the current order.
    void merge(std::size_t from, std::size_t into) {
        if (from == into) throw StateError("cannot merge a super node into itself");
        auto& dst = supers_.at(into).members;
        const auto& src = supers_.at(from).members;
        dst.insert(dst.end(), src.begin(), src.end());
        supers_.erase(supers_.begin() + static_cast<std::ptrdiff_t>(from));
        normalize();
    }

    // Moves the upper half (by degree) of `donor`'s members into a new super.
    // Returns false when the donor has fewer than two members.
    bool split(std::size_t donor) {
        auto members = supers_.at(donor).members;
        if (members.size() < 2) return false;
        std::sort(members.begin(), members.end(), [&](NodeId a, NodeId b) {
            return source_degrees_[a] != source_degrees_[b] ? source_degrees_[a] > source_degrees_[b] : a < b;
        });
        std::size_t moved = members.size() / 2;
        SuperNode upper;
        upper.members.assign(members.begin(), members.begin() + static_cast<std::ptrdiff_t>(moved));
        supers_[donor].members.assign(members.begin() + static_cast<std::ptrdiff_t>(moved), members.end());
        supers_.push_back(std::move(upper));
        normalize();
        return true;
    }

private:
    void normalize() {
        for (auto& s : supers_) {
            std::sort(s.members.begin(), s.members.end());
            s.representative_degree = mean_degree(s.members);
        }
        std::sort(supers_.begin(), supers_.end(), [](const SuperNode& a, const SuperNode& b) {
            if (a.representative_degree != b.representative_degree)
                return a.representative_degree > b.representative_degree;
            return a.members.front() < b.members.front();
        });
    }

    std::vector<SuperNode> supers_;
    std::vector<std::size_t> source_degrees_;
};

// One super node per distinct positive source degree.
inline SuperNodeSet init_super_nodes(const DegreeStats& source) {
    if (source.node_count() == 0) throw ValueError("init_super_nodes: empty source graph");
    std::map<std::size_t, std::vector<NodeId>> by_degree;
    for (NodeId v = 0; v < source.node_count(); ++v)
        if (source.degree_sequence[v] > 0) by_degree[source.degree_sequence[v]].push_back(v);
    std::vector<SuperNode> supers;
    for (auto& [deg, members] : by_degree) supers.push_back({std::move(members), static_cast<double>(deg)});
    return SuperNodeSet(std::move(supers), source.degree_sequence);
}

inline SuperNodeSet init_super_nodes(const Graph& source) { return init_super_nodes(degree_stats(source)); }

enum class BalanceCase { equal = 1, more_supers = 2, fewer_supers = 3 };

struct SuperLink {
    std::size_t super_id;
    double weight;
};

struct CrossLink {
    NodeId target;
    std::size_t super_id;
    double weight;
};

// Predicted links between target nodes and super nodes. Target nodes of the
// same degree class share one link list; the alignment slot of a link is the
// rank of its super node.
class CrossLinks {
public:
    CrossLinks() = default;

    // One class per target node; used to build arbitrary link sets.
    static CrossLinks from_links(std::size_t target_count, std::span<const CrossLink> links) {
        CrossLinks c;
        c.node_class_.resize(target_count);
        c.class_links_.resize(target_count);
        c.class_degree_.assign(target_count, 0.0);
        std::iota(c.node_class_.begin(), c.node_class_.end(), std::size_t{0});
        std::size_t max_super = 0;
        for (const auto& l : links) {
            if (l.target >= target_count) throw ValueError("cross link target out of range");
            if (!(l.weight > 0.0)) continue;
            c.class_links_[l.target].push_back({l.super_id, l.weight});
            max_super = std::max(max_super, l.super_id + 1);
        }
        c.slot_count_ = max_super;
        c.n_link_ = max_super;
        return c;
    }

    std::size_t target_count() const noexcept { return node_class_.size(); }
    std::size_t class_count() const noexcept { return class_links_.size(); }
    std::size_t n_link() const noexcept { return n_link_; }
    BalanceCase alignment_case() const noexcept { return case_; }

    std::span<const SuperLink> links_of(NodeId target) const {
        auto c = node_class_.at(target);
        if (c == npos) return {};
        return class_links_[c];
    }

    std::size_t class_of(NodeId target) const { return node_class_.at(target); }
    std::span<const SuperLink> class_links(std::size_t cls) const { return class_links_.at(cls); }
    double class_degree(std::size_t cls) const { return class_degree_.at(cls); }

    // Indicator over the n_link alignment slots (super-node ranks).
    std::vector<std::uint8_t> delta(NodeId target) const {
        std::vector<std::uint8_t> d(n_link_, 0);
        auto c = node_class_.at(target);
        if (c == npos) return d;
        for (const auto& l : class_links_[c])
            if (l.super_id < super_slot_.size()) d[super_slot_[l.super_id]] = 1;
            else if (l.super_id < n_link_) d[l.super_id] = 1;
        return d;
    }

    std::vector<CrossLink> links() const {
        std::vector<CrossLink> out;
        for (NodeId t = 0; t < node_class_.size(); ++t)
            for (const auto& l : links_of(t)) out.push_back({t, l.super_id, l.weight});
        return out;
    }

    std::size_t link_count() const {
        std::size_t n = 0;
        for (NodeId t = 0; t < node_class_.size(); ++t) n += links_of(t).size();
        return n;
    }

private:
    friend CrossLinks init_weights(CrossLinks, const DegreeStats&, const SuperNodeSet&);
    friend CrossLinks make_alignment(const DegreeStats&, const SuperNodeSet&, bool);

    std::vector<std::size_t> node_class_;               // target node -> class, npos if unaligned
    std::vector<double> class_degree_;                  // Deg(v^t) of the class
    std::vector<std::vector<SuperLink>> class_links_;   // per class
    std::vector<std::size_t> super_slot_;               // super id -> rank slot
    std::size_t slot_count_ = 0;
    std::size_t n_link_ = 0;
    BalanceCase case_ = BalanceCase::equal;
};

// min/max degree ratio, 1 when both are zero
inline double link_weight(double target_degree, double super_degree) {
    double hi = std::max(target_degree, super_degree);
    if (hi == 0.0) return 1.0;
    return std::min(target_degree, super_degree) / hi;
}

namespace detail {

// Target degree classes: distinct positive degrees, decreasing.
inline std::vector<std::size_t> target_classes(const DegreeStats& t) {
    std::vector<std::size_t> out;
    for (auto d : t.distinct_degrees)
        if (d > 0) out.push_back(d);
    return out;
}

// ceil(a * b / c) for positive integers
inline std::size_t ceil_ratio(std::size_t a, std::size_t b, std::size_t c) { return (a * b + c - 1) / c; }

}  // namespace detail

// residual=false: the ranked alignment. Equal scales map rank to rank; more
// super ranks than target classes map super rank j (1-based) to target class
// ceil(j * n_t / n'); fewer super ranks link target class i to super rank i
// for i <= n' and leave the rest unlinked (the case is flagged for splitting).
// residual=true: for the fewer-supers case, every target class i is linked to
// super rank ceil(i * n' / n_t) instead.
inline CrossLinks make_alignment(const DegreeStats& target, const SuperNodeSet& supers, bool residual) {
    auto classes = detail::target_classes(target);
    auto groups = supers.rank_groups();
    if (classes.empty() || groups.empty()) throw ValueError("align_by_rank: empty degree lists");
    const std::size_t nt = classes.size(), ns = groups.size();

    CrossLinks c;
    c.case_ = ns == nt ? BalanceCase::equal : (ns > nt ? BalanceCase::more_supers : BalanceCase::fewer_supers);
    c.n_link_ = std::max(ns, nt);
    c.slot_count_ = ns;
    c.class_degree_.resize(nt);
    c.class_links_.resize(nt);
    for (std::size_t i = 0; i < nt; ++i) c.class_degree_[i] = static_cast<double>(classes[i]);
    c.super_slot_.assign(supers.size(), 0);
    for (std::size_t r = 0; r < ns; ++r)
        for (auto s : groups[r]) c.super_slot_[s] = r;

    auto link_rank = [&](std::size_t cls, std::size_t rank) {
        for (auto s : groups[rank]) c.class_links_[cls].push_back({s, 0.0});
    };
    if (ns >= nt) {
        for (std::size_t j = 1; j <= ns; ++j) link_rank(detail::ceil_ratio(j, nt, ns) - 1, j - 1);
    } else if (!residual) {
        for (std::size_t i = 0; i < ns; ++i) link_rank(i, i);
    } else {
        for (std::size_t i = 1; i <= nt; ++i) link_rank(i - 1, detail::ceil_ratio(i, ns, nt) - 1);
    }

    c.node_class_.assign(target.node_count(), npos);
    for (NodeId v = 0; v < target.node_count(); ++v) {
        auto d = target.degree_sequence[v];
        if (d == 0) continue;
        auto it = std::lower_bound(classes.begin(), classes.end(), d, std::greater<>());
        c.node_class_[v] = static_cast<std::size_t>(it - classes.begin());
    }
    return c;
}

inline CrossLinks align_by_rank(const DegreeStats& target, const SuperNodeSet& supers) {
    return make_alignment(target, supers, false);
}

inline CrossLinks align_residual(const DegreeStats& target, const SuperNodeSet& supers) {
    return make_alignment(target, supers, true);
}

// Sets every link weight from the degree similarity of its endpoints and
// drops zero-weight links, so links and positive weights stay in bijection.
inline CrossLinks init_weights(CrossLinks cross, const DegreeStats& /*target*/, const SuperNodeSet& supers) {
    for (std::size_t cls = 0; cls < cross.class_links_.size(); ++cls) {
        auto& links = cross.class_links_[cls];
        for (auto& l : links) l.weight = link_weight(cross.class_degree_[cls], supers[l.super_id].representative_degree);
        std::erase_if(links, [](const SuperLink& l) { return !(l.weight > 0.0); });
    }
    return cross;
}

struct BalanceParams {
    double gamma = 100.0;
    double lambda = 100.0;
    std::optional<double> a_plus;  // min(a^s, a^t); estimated from the graphs when unset
    double c = 1.0;
    double epsilon = 1e-9;
    std::optional<std::size_t> max_iterations;  // default 10 * initial super count

    void validate() const {
        if (!(gamma > 0) || !(lambda > 0) || !(c > 0) || !(epsilon > 0))
            throw ValueError("balance parameters must be positive");
        if (a_plus && !(*a_plus > 0)) throw ValueError("a_plus must be positive");
    }
};

// The likelihood is eta * inner with
//   eta   = (1/n_t) * exp((1 - n'^2) / n') * gamma * exp(lambda)
//   inner = sum_i sum_j [log C - a_plus * log(|delta_i . w_i|^2)]
// eta overflows for the default lambda, so it is kept as log_eta.
struct ObjectiveValue {
    double log_eta = 0.0;
    double inner = 0.0;

    double value() const { return std::exp(log_eta) * inner; }
    // log |value|; -inf when inner is zero
    double log_abs() const {
        return inner == 0.0 ? -std::numeric_limits<double>::infinity() : log_eta + std::log(std::abs(inner));
    }
};

// |change| of the log-objective; infinite on a sign change.
inline double objective_delta(const ObjectiveValue& a, const ObjectiveValue& b) {
    if (a.log_eta == b.log_eta && a.inner == b.inner) return 0.0;
    if ((a.inner > 0) != (b.inner > 0) || a.inner == 0.0 || b.inner == 0.0)
        return std::numeric_limits<double>::infinity();
    return std::abs(a.log_abs() - b.log_abs());
}

inline constexpr double kNormFloor = 1e-12;

inline ObjectiveValue objective(const CrossLinks& cross, const BalanceParams& params, const DegreeStats& target,
                                const SuperNodeSet& supers) {
    const double n_t = static_cast<double>(detail::target_classes(target).size());
    const double n_s = static_cast<double>(supers.n_deg_prime());
    const double a_plus = params.a_plus.value_or(1.0);
    ObjectiveValue v;
    v.log_eta = -std::log(n_t) + (1.0 - n_s * n_s) / n_s + std::log(params.gamma) + params.lambda;
    const double slots = static_cast<double>(cross.n_link());
    for (NodeId t = 0; t < cross.target_count(); ++t) {
        if (cross.class_of(t) == npos) continue;
        double norm2 = 0.0;
        for (const auto& l : cross.links_of(t)) norm2 += l.weight * l.weight;
        v.inner += slots * (std::log(params.c) - a_plus * std::log(std::max(norm2, kNormFloor)));
    }
    return v;
}

// Zeroes the smallest-weight link of `target_node` and merges that super node
// into the remaining linked super node of smallest weight. Ties go to the
// smaller representative degree. Alignment and weights are then recomputed.
inline std::pair<CrossLinks, SuperNodeSet> merge_step(const CrossLinks& cross, SuperNodeSet supers,
                                                      const DegreeStats& target, NodeId target_node) {
    auto links = cross.links_of(target_node);
    if (links.size() < 2) throw StateError("merge_step: target node has fewer than 2 links");
    std::vector<SuperLink> order(links.begin(), links.end());
    std::sort(order.begin(), order.end(), [&](const SuperLink& a, const SuperLink& b) {
        if (a.weight != b.weight) return a.weight < b.weight;
        double da = supers[a.super_id].representative_degree, db = supers[b.super_id].representative_degree;
        if (da != db) return da < db;
        return a.super_id < b.super_id;
    });
    supers.merge(order[0].super_id, order[1].super_id);
    auto updated = init_weights(align_by_rank(target, supers), target, supers);
    return {std::move(updated), std::move(supers)};
}

struct SplitResult {
    SuperNodeSet supers;
    std::size_t inserted = 0;
    std::size_t skipped = 0;   // donors with a single member
    std::size_t residual = 0;  // n_t - n' after the step, if positive
};

// Inserts min(n_t - n', n') null super nodes at evenly spaced rank positions;
// each is filled with the upper half of the super node ranked just above it.
inline SplitResult split_step(SuperNodeSet supers, std::size_t n_deg_t) {
    const std::size_t ns = supers.n_deg_prime();
    if (ns >= n_deg_t) throw StateError("split_step: super-node scale is not below the target scale");
    const std::size_t nulls = std::min(n_deg_t - ns, ns);
    auto groups = supers.rank_groups();

    // Donors are fixed up front (by member identity) so earlier splits don't
    // shift later positions.
    std::vector<NodeId> donor_keys;
    SplitResult res;
    for (std::size_t i = 0; i < nulls; ++i) {
        const auto& g = groups[i * ns / nulls];
        std::size_t best = g.front();
        for (auto s : g)
            if (supers[s].members.size() > supers[best].members.size()) best = s;
        donor_keys.push_back(supers[best].members.front());
    }
    for (NodeId key : donor_keys) {
        auto m = supers.membership();
        if (supers[m[key]].members.size() < 2) {
            ++res.skipped;
            continue;
        }
        supers.split(m[key]);
        ++res.inserted;
    }
    auto after = supers.n_deg_prime();
    res.residual = after < n_deg_t ? n_deg_t - after : 0;
    res.supers = std::move(supers);
    return res;
}

enum class BalanceStatus { converged, epsilon_stop, max_iterations };

struct BalanceResult {
    SuperNodeSet supers;
    CrossLinks cross;
    BalanceStatus status = BalanceStatus::converged;
    std::size_t iterations = 0;
    std::size_t merges = 0;
    std::size_t splits = 0;
    std::size_t max_iterations = 0;
    double a_plus = 1.0;
    std::vector<ObjectiveValue> trajectory;
};

namespace detail {

// Among classes holding >= 2 links, the one whose smallest link weight is
// globally minimal (ties: smaller super degree, then lower class rank).
inline std::optional<NodeId> merge_candidate(const CrossLinks& cross, const SuperNodeSet& supers) {
    std::optional<std::size_t> best_cls;
    double best_w = 0, best_deg = 0;
    for (std::size_t cls = 0; cls < cross.class_count(); ++cls) {
        auto links = cross.class_links(cls);
        if (links.size() < 2) continue;
        for (const auto& l : links) {
            double deg = supers[l.super_id].representative_degree;
            if (!best_cls || l.weight < best_w || (l.weight == best_w && deg < best_deg)) {
                best_cls = cls;
                best_w = l.weight;
                best_deg = deg;
            }
        }
    }
    if (!best_cls) return std::nullopt;
    for (NodeId t = 0; t < cross.target_count(); ++t)
        if (cross.class_of(t) == *best_cls) return t;
    return std::nullopt;
}

inline double estimate_a_plus(const DegreeStats& source, const DegreeStats& target) {
    auto slope = [](const DegreeStats& s) -> std::optional<double> {
        try {
            auto f = fit_power_law(s);
            if (f.slope_a > 0) return f.slope_a;
        } catch (const FitError&) {
        }
        return std::nullopt;
    };
    auto as = slope(source), at = slope(target);
    if (as && at) return std::min(*as, *at);
    if (as) return *as;
    if (at) return *at;
    return 1.0;
}

}  // namespace detail

// Node-scale balancing loop: merge in the more-supers case, split in the
// fewer-supers case, until the distinct-degree scales match, the objective
// stops moving (|delta log-objective| < epsilon) or the iteration guard
// trips. A residual fewer-supers state is closed by linking every target
// class to its proportional super rank.
inline BalanceResult balance(const DegreeStats& source, const DegreeStats& target, BalanceParams params) {
    params.validate();
    if (source.node_count() == 0 || target.node_count() == 0) throw ValueError("balance: empty graph");
    const std::size_t n_t = detail::target_classes(target).size();
    if (n_t == 0) throw ValueError("balance: target graph has no edges");

    BalanceResult res;
    res.a_plus = params.a_plus.value_or(detail::estimate_a_plus(source, target));
    params.a_plus = res.a_plus;
    SuperNodeSet supers = init_super_nodes(source);
    if (supers.size() == 0) throw ValueError("balance: source graph has no edges");
    res.max_iterations = params.max_iterations.value_or(10 * supers.size());

    CrossLinks cross;
    std::optional<ObjectiveValue> prev;
    while (true) {
        cross = init_weights(align_by_rank(target, supers), target, supers);
        auto obj = objective(cross, params, target, supers);
        res.trajectory.push_back(obj);
        const std::size_t ns = supers.n_deg_prime();
        if (ns == n_t) {
            res.status = BalanceStatus::converged;
            break;
        }
        if (prev && objective_delta(*prev, obj) < params.epsilon) {
            res.status = BalanceStatus::epsilon_stop;
            break;
        }
        if (res.iterations >= res.max_iterations) {
            res.status = BalanceStatus::max_iterations;
            break;
        }
        prev = obj;
        ++res.iterations;
        if (ns > n_t) {
            auto node = detail::merge_candidate(cross, supers);
            if (!node) throw StateError("balance: no mergeable target class");
            auto [c, s] = merge_step(cross, std::move(supers), target, *node);
            supers = std::move(s);
            ++res.merges;
        } else {
            auto split = split_step(std::move(supers), n_t);
            supers = std::move(split.supers);
            res.splits += split.inserted;
        }
    }
    if (supers.n_deg_prime() < n_t) cross = init_weights(align_residual(target, supers), target, supers);
    res.supers = std::move(supers);
    res.cross = std::move(cross);
    return res;
}

inline BalanceResult balance(const Graph& source, const Graph& target, const BalanceParams& params) {
    return balance(degree_stats(source), degree_stats(target), params);
}

// "super_id<TAB>rep_degree<TAB>member,member,..."
inline std::string write_super_nodes(const SuperNodeSet& s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        out += std::to_string(i) + '\t';
        append_double(out, s[i].representative_degree);
        out += '\t';
        for (std::size_t k = 0; k < s[i].members.size(); ++k) {
            if (k) out += ',';
            out += std::to_string(s[i].members[k]);
        }
        out += '\n';
    }
    return out;
}

inline SuperNodeSet read_super_nodes(std::string_view text, std::vector<std::size_t> source_degrees) {
    std::vector<SuperNode> supers;
    for_each_line(text, [&](std::size_t line_no, std::string_view line) {
        auto body = trim(line);
        if (body.empty() || body.front() == '#') return;
        auto tok = split_tokens(body);
        if (tok.size() != 3) throw ParseError(line_no, "expected super_id, rep_degree, members");
        SuperNode s;
        for (auto m : split_tokens(tok[2], true)) {
            auto v = parse_int<NodeId>(m);
            if (!v || *v >= source_degrees.size()) throw ParseError(line_no, "bad member '" + std::string(m) + "'");
            s.members.push_back(*v);
        }
        if (s.members.empty()) throw ParseError(line_no, "super node without members");
        supers.push_back(std::move(s));
    });
    return SuperNodeSet(std::move(supers), std::move(source_degrees));
}

// "target_node<TAB>super_id<TAB>weight"
inline std::string write_cross_links(const CrossLinks& c) {
    std::string out;
    for (const auto& l : c.links()) {
        out += std::to_string(l.target) + '\t' + std::to_string(l.super_id) + '\t';
        append_double(out, l.weight);
        out += '\n';
    }
    return out;
}

inline CrossLinks read_cross_links(std::string_view text, std::size_t target_count) {
    std::vector<CrossLink> links;
    for_each_line(text, [&](std::size_t line_no, std::string_view line) {
        auto body = trim(line);
        if (body.empty() || body.front() == '#') return;
        auto tok = split_tokens(body);
        if (tok.size() != 3) throw ParseError(line_no, "expected target, super_id, weight");
        auto t = parse_int<NodeId>(tok[0]);
        auto s = parse_int<std::size_t>(tok[1]);
        auto w = parse_double(tok[2]);
        if (!t || !s || !w) throw ParseError(line_no, "malformed cross link");
        links.push_back({*t, *s, *w});
    });
    return CrossLinks::from_links(target_count, links);
}

}  // namespace cdnr
