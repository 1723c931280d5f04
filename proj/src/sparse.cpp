#include "nia/sparse.hpp"

#include <algorithm>
#include <stdexcept>

namespace nia {

std::shared_ptr<const CsrPattern> make_pattern(std::size_t rows, std::size_t cols,
                                               std::vector<std::pair<std::size_t, std::size_t>> entries) {
    for (const auto& [r, c] : entries) {
        if (r >= rows || c >= cols) throw std::out_of_range("make_pattern: entry out of range");
    }
    std::sort(entries.begin(), entries.end());
    entries.erase(std::unique(entries.begin(), entries.end()), entries.end());

    auto pat = std::make_shared<CsrPattern>();
    pat->rows = rows;
    pat->cols = cols;
    pat->offsets.assign(rows + 1, 0);
    pat->indices.reserve(entries.size());
    for (const auto& [r, c] : entries) {
        ++pat->offsets[r + 1];
        pat->indices.push_back(c);
    }
    for (std::size_t i = 0; i < rows; ++i) pat->offsets[i + 1] += pat->offsets[i];
    return pat;
}

}  // namespace nia
