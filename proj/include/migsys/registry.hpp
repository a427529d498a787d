// SPDX-License-Identifier: MIT
#pragma once

#include <algorithm>
#include <charconv>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace migsys {

// ---------------------------------------------------------------------------
// NodeRegistry: bidirectional map between external location identifiers
// (FIPS codes, country codes) and dense indices. Index order is stable for
// a session and persisted with any exported model.
// ---------------------------------------------------------------------------
class NodeRegistry {
public:
    NodeRegistry() = default;

    /// Build from an ordered id list; ids must be unique and non-empty.
    explicit NodeRegistry(std::vector<std::string> ids) : ids_(std::move(ids)) {
        for (int i = 0; i < static_cast<int>(ids_.size()); ++i) {
            if (ids_[i].empty())
                throw std::invalid_argument("NodeRegistry: empty id");
            if (!index_.emplace(ids_[i], i).second)
                throw std::invalid_argument("NodeRegistry: duplicate id '" + ids_[i] + "'");
        }
    }

    /// Registry over the sorted unique ids appearing in `ids` (deterministic
    /// under input permutation).
    static NodeRegistry from_unsorted(std::vector<std::string> ids) {
        std::sort(ids.begin(), ids.end());
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
        return NodeRegistry(std::move(ids));
    }

    int size() const { return static_cast<int>(ids_.size()); }
    const std::string& id(int index) const { return ids_.at(index); }
    const std::vector<std::string>& ids() const { return ids_; }

    bool contains(const std::string& id) const { return index_.count(id) > 0; }

    int index_of(const std::string& id) const {
        auto it = index_.find(id);
        if (it == index_.end())
            throw std::invalid_argument("NodeRegistry: unknown id '" + id + "'");
        return it->second;
    }

private:
    std::vector<std::string> ids_;
    std::unordered_map<std::string, int> index_;
};

// ---------------------------------------------------------------------------
// PeriodAxis: ordered period labels ("1990".."2018" yearly, or "1990",
// "1995", ... for five-year intervals, each interval labelled by its first
// year). Labels must be strictly increasing: numerically when every label
// parses as an integer, lexicographically otherwise.
// ---------------------------------------------------------------------------
class PeriodAxis {
public:
    PeriodAxis() = default;

    explicit PeriodAxis(std::vector<std::string> labels) : labels_(std::move(labels)) {
        if (labels_.empty()) throw std::invalid_argument("PeriodAxis: no labels");
        const bool numeric = all_numeric(labels_);
        for (std::size_t i = 0; i + 1 < labels_.size(); ++i) {
            const bool ok = numeric ? as_int(labels_[i]) < as_int(labels_[i + 1])
                                    : labels_[i] < labels_[i + 1];
            if (!ok)
                throw std::invalid_argument("PeriodAxis: labels not strictly increasing at '" +
                                            labels_[i + 1] + "'");
        }
        for (int k = 0; k < static_cast<int>(labels_.size()); ++k) index_[labels_[k]] = k;
    }

    int size() const { return static_cast<int>(labels_.size()); }
    const std::string& label(int k) const { return labels_.at(k); }
    const std::vector<std::string>& labels() const { return labels_; }

    bool contains(const std::string& label) const { return index_.count(label) > 0; }

    int index_of(const std::string& label) const {
        auto it = index_.find(label);
        if (it == index_.end())
            throw std::invalid_argument("PeriodAxis: unknown period label '" + label + "'");
        return it->second;
    }

private:
    static bool all_numeric(const std::vector<std::string>& labels) {
        for (const auto& s : labels) {
            long long v = 0;
            auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc() || p != s.data() + s.size()) return false;
        }
        return true;
    }
    static long long as_int(const std::string& s) {
        long long v = 0;
        std::from_chars(s.data(), s.data() + s.size(), v);
        return v;
    }

    std::vector<std::string> labels_;
    std::unordered_map<std::string, int> index_;
};

}  // namespace migsys
