#pragma once

#include <vector>

#include "ovalcert/cnf.hpp"
#include "ovalcert/geometry.hpp"
#include "ovalcert/onefact.hpp"

namespace ovalcert {

struct EncodeOptions {
  // Substitute fixed cells. When off, every non-oval cell of the selected
  // columns gets a variable and the frame's fixed entries become units.
  bool simplify = true;
  // Extra cells treated as fixed (e.g. a block filled by a factorization).
  Assignment fixed;
};

// Encodes the oval constraints over the oval columns plus `columns`:
//  * no two columns share two rows,
//  * every selected column meets every oval column,
//  * each retained block line (block >= 2) meets every line through two of
//    the points 3..n+2 that avoids it, inside its own block.
// Throws std::invalid_argument for an empty selection or an oval/out of
// range column.
CnfInstance encode(const OvalFrame& frame, std::vector<int> columns,
                   const EncodeOptions& options = {});

// Cells of block j determined by a factorization whose factor i contains the
// internal edge {0, i+1}. Throws std::invalid_argument when fz is on the
// wrong vertex count, out of block order, or disagrees with a fixed cell.
Assignment block_cells(const OvalFrame& frame, int block, const OneFactorization& fz);

// Fixes block j to fz. With simplification the instance is re-encoded with
// the block substituted; otherwise unit clauses are appended.
CnfInstance fix_block(const OvalFrame& frame, const CnfInstance& instance, int block,
                      const OneFactorization& fz, int label = 0);

struct ExtensionInstance {
  CnfInstance instance;
  // Positive literals of the completion's One cells.
  std::vector<Lit> cube;
};

// Instance over blocks first..extra_block with the completion of blocks
// first..last as a cube. Throws std::invalid_argument when the completion
// does not assign every Unknown cell of those blocks or fails validation.
// With `with_block_one` block 1 is searched as well, so extending to the
// last block asks for the whole frame.
ExtensionInstance extension_instance(const OvalFrame& frame, const Assignment& completion,
                                     int first_block, int last_block, int extra_block,
                                     bool with_block_one = false);

// Unknown frame cells of a model (indexed by variable, entry 0 unused).
Assignment model_assignment(const OvalFrame& frame, const CnfInstance& instance,
                            const std::vector<bool>& model);

}  // namespace ovalcert
