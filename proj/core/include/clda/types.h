#pragma once

#include <cstdint>
#include <vector>

namespace clda {

using WordId = std::uint32_t;

// Dense real vector over the vocabulary or over topics.
using Vector = std::vector<double>;

}  // namespace clda
