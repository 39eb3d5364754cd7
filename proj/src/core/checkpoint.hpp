#pragma once

#include <string>

#include "delete_op.hpp"
#include "model.hpp"

namespace gnnd {

// Binary checkpoint format, little-endian:
//   "GNND" | u16 version=1 | u16 kind (0 model, 1 operator)
//   model:    u32 L | u32 dims[L+1] | f64 row-major weights per layer
//             | u8 has_head | [u32 num_classes | f64 head]
//   operator: u32 A | u32 dims[A] | f64 row-major weights per layer
//             | u8 mode | u8 activation | u32 mask_count | u64 num_nodes
//             | per mask: ceil(n/8) bitmap bytes
void save_model(const GnnModel& model, const std::string& path);
GnnModel load_model(const std::string& path);

void save_operator(const DeletionOperator& op, const std::string& path);
DeletionOperator load_operator(const std::string& path);

}  // namespace gnnd
