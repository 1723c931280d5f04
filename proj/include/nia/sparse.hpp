#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace nia {

// Compressed-row structure shared between matrices that differ only in values.
struct CsrPattern {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::size_t> offsets;  // rows + 1
    std::vector<std::size_t> indices;  // column ids, ascending within each row

    std::size_t nnz() const { return indices.size(); }

    std::span<const std::size_t> row(std::size_t i) const {
        return {indices.data() + offsets[i], offsets[i + 1] - offsets[i]};
    }
};

// Builds a pattern from (row, col) pairs; duplicates are collapsed.
std::shared_ptr<const CsrPattern> make_pattern(std::size_t rows, std::size_t cols,
                                               std::vector<std::pair<std::size_t, std::size_t>> entries);

struct CsrMatrix {
    std::shared_ptr<const CsrPattern> pattern;
    std::vector<double> values;  // parallel to pattern->indices

    std::size_t rows() const { return pattern->rows; }
    std::size_t cols() const { return pattern->cols; }
};

}  // namespace nia
