#pragma once

#include "collab/algorithms.hpp"

namespace collab::detail {

RunMetadata make_meta(Algorithm algo, std::size_t k, std::uint64_t budget, double epsilon,
                      double delta, std::size_t rounds);

}  // namespace collab::detail
