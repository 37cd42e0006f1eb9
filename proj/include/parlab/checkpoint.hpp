// Copyright (C) 2026 parlab contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef PARLAB_CHECKPOINT_HPP
#define PARLAB_CHECKPOINT_HPP

#include <cstdint>
#include <string>

#include "parlab/tensor.hpp"

namespace parlab::num {

/// Checkpoints are two files sharing a stem: `<stem>.json` (manifest with
/// {name, shape, byte_offset} entries in lexicographic name order) and
/// `<stem>.bin` (the little-endian IEEE-754 float32 blob, row-major,
/// concatenated in manifest order).
void save_checkpoint(const ParamSet& params, const std::string& stem);

ParamSet load_checkpoint(const std::string& stem);

/// FNV-1a of the blob bytes; the checkpoint id used in provenance headers.
uint64_t checkpoint_blob_hash(const ParamSet& params);
std::string checkpoint_id(const ParamSet& params);

} // namespace parlab::num

#endif
