#ifndef SELFALIGN_REFERENCE_HPP_
#define SELFALIGN_REFERENCE_HPP_

// Straightforward serial versions of the parallel kernels. They exist to be
// compared against (tests) and timed against (bench); nothing in the library
// or CLI calls them.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "selfalign/encoder.hpp"
#include "selfalign/matrix.hpp"
#include "selfalign/metric.hpp"

namespace selfalign::reference {

/// Mean-pooled projection, one name at a time, no OpenMP.
Matrix encode_batch(const EncoderModel& model, std::span<const std::string> names);

/// S_ij = x_i . x_j / (|x_i| |x_j|), every entry computed independently.
Matrix cosine_similarity(const Matrix& x);

/// Enumerates every (a, p, n) triplet and tests D_ap + lambda > D_an. O(B^3).
MinedPairs mine_hard_pairs(const Matrix& distances, std::span<const std::uint32_t> label_ids, double lambda);

/// Scores every row, full stable sort by similarity descending; (row, similarity).
std::vector<std::pair<std::size_t, double>> topk(const Matrix& unit_rows, std::span<const double> query,
                                                 std::size_t k);

}  // namespace selfalign::reference

#endif  // SELFALIGN_REFERENCE_HPP_
