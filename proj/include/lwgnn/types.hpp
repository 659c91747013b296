#pragma once

#include <cstddef>
#include <vector>

namespace lwgnn {

using ClassId = int;
inline constexpr ClassId kUnlabeled = -1;

using Labels = std::vector<ClassId>;
using NodeMask = std::vector<bool>;

inline std::size_t mask_count(const NodeMask& mask) {
    std::size_t n = 0;
    for (bool b : mask) n += b ? 1 : 0;
    return n;
}

}  // namespace lwgnn
