#include <algorithm>
#include <map>

#include "bsde/errors.hpp"
#include "bsde/strat.hpp"

namespace bsde {

SignatureAccumulator::SignatureAccumulator(const std::vector<MultiIndex>& words, int d) : d_(d) {
    std::map<MultiIndex, std::size_t> slot_of;
    std::vector<MultiIndex> all;
    auto intern = [&](const MultiIndex& w) {
        if (!slot_of.count(w)) {
            slot_of[w] = all.size();
            all.push_back(w);
        }
    };
    intern({});
    for (const auto& w : words) {
        for (int letter : w)
            if (letter < 0 || letter > d) throw InvalidArgument("letter " + std::to_string(letter) + " exceeds d");
        for (std::size_t k = 1; k <= w.size(); ++k) intern(MultiIndex(w.begin(), w.begin() + k));
    }
    // Reorder slots by decreasing length so in-place updates only read stale prefixes.
    std::vector<std::size_t> order(all.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return all[a].size() > all[b].size(); });
    std::vector<std::size_t> new_slot(all.size());
    for (std::size_t i = 0; i < order.size(); ++i) new_slot[order[i]] = i;

    std::size_t max_len = 0;
    for (std::size_t i : order) {
        const MultiIndex& w = all[i];
        Entry e{w, {}};
        for (std::size_t k = 0; k < w.size(); ++k)
            e.prefix.push_back(new_slot[slot_of[MultiIndex(w.begin(), w.begin() + k)]]);
        entries_.push_back(std::move(e));
        max_len = std::max(max_len, w.size());
    }
    for (const auto& w : words) word_slot_.push_back(new_slot[slot_of[w]]);
    values_.assign(entries_.size(), 0.0);
    suffix_.assign(max_len + 1, 0.0);
    reset();
}

void SignatureAccumulator::reset() {
    for (std::size_t i = 0; i < entries_.size(); ++i) values_[i] = entries_[i].letters.empty() ? 1.0 : 0.0;
}

void SignatureAccumulator::add_segment(std::span<const double> incr) {
    // new[w] = sum_k old[w[:k]] * seg[w[k:]], seg[v] = prod incr[v] / |v|! on a straight segment.
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const Entry& e = entries_[i];
        const std::size_t len = e.letters.size();
        if (len == 0) continue;
        double prod = 1.0;
        double acc = values_[i];
        for (std::size_t k = len; k-- > 0;) {
            prod *= incr[e.letters[k]] / static_cast<double>(len - k);
            acc += values_[e.prefix[k]] * prod;
        }
        values_[i] = acc;
    }
}

void SignatureAccumulator::add_path(const PiecewiseLinearPath& path, double s, double t) {
    std::vector<double> incr(d_ + 1);
    for (std::size_t k = 0; k + 1 < path.times.size(); ++k) {
        double a = std::max(s, path.times[k]);
        double b = std::min(t, path.times[k + 1]);
        if (!(b > a)) continue;
        double len = path.times[k + 1] - path.times[k];
        double frac = (b - a) / len;
        incr[0] = b - a;
        for (int l = 1; l <= d_; ++l) {
            double dv = l <= path.d ? path.values[k + 1][l - 1] - path.values[k][l - 1] : 0.0;
            incr[l] = dv * frac;
        }
        add_segment(incr);
    }
}

double pathwise_integral(const MultiIndex& a, const PiecewiseLinearPath& path, double s, double t) {
    if (path.times.empty() || s < path.times.front() || t > path.times.back() || s > t)
        throw InvalidArgument("integration interval outside path support");
    SignatureAccumulator acc({a}, path.d);
    acc.add_path(path, s, t);
    return acc.value(0);
}

}  // namespace bsde
