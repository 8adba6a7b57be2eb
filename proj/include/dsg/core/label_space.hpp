#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "dsg/error.hpp"

namespace dsg {

/// Integer id of one semantic class.
using ClassId = std::int64_t;

/// Ordered set of class ids, strictly increasing. Declares the label universe
/// of a dataset and carries intersections between universes.
class LabelSpace {
public:
    LabelSpace() = default;

    explicit LabelSpace(std::vector<ClassId> ids) : ids_(std::move(ids)) {
        for (std::size_t i = 0; i < ids_.size(); ++i) {
            if (ids_[i] < 0) throw DataError("class ids must be non-negative");
            if (i > 0 && ids_[i] <= ids_[i - 1])
                throw DataError("class ids must be strictly increasing");
        }
    }

    static LabelSpace from_unsorted(std::vector<ClassId> ids) {
        std::sort(ids.begin(), ids.end());
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
        return LabelSpace(std::move(ids));
    }

    std::size_t size() const { return ids_.size(); }
    bool empty() const { return ids_.empty(); }
    ClassId at(std::size_t i) const { return ids_[i]; }
    const std::vector<ClassId>& ids() const { return ids_; }

    bool contains(ClassId id) const {
        return std::binary_search(ids_.begin(), ids_.end(), id);
    }

    /// Position of id within the ordered set; -1 when absent.
    std::ptrdiff_t index_of(ClassId id) const {
        auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
        if (it == ids_.end() || *it != id) return -1;
        return it - ids_.begin();
    }

    bool is_subset_of(const LabelSpace& other) const {
        return std::includes(other.ids_.begin(), other.ids_.end(), ids_.begin(), ids_.end());
    }

    friend LabelSpace intersect(const LabelSpace& a, const LabelSpace& b) {
        std::vector<ClassId> out;
        std::set_intersection(a.ids_.begin(), a.ids_.end(), b.ids_.begin(), b.ids_.end(),
                              std::back_inserter(out));
        return LabelSpace(std::move(out));
    }

    bool operator==(const LabelSpace&) const = default;

private:
    std::vector<ClassId> ids_;
};

} // namespace dsg
