#pragma once

#include "gf/grid.hpp"

namespace gf {

/// Field snapshot container (see docs/formats.md): 8-byte magic "GFSNAP1\n",
/// little-endian u64 JSON header length, the JSON header (chart ids,
/// resolutions, slot signature), then for each field its complex values as
/// row-major IEEE-754 doubles, re/im interleaved.
struct SnapshotField {
    std::string name;
    std::string slots;        ///< slot signature, e.g. "ij~" or "scalar"
    const Field* field;
};

void save_snapshot(const std::string& path, const std::vector<SnapshotField>& fields);

/// loads payloads into the provided fields (grids must already match the header)
void load_snapshot(const std::string& path, const std::vector<std::string>& names,
                   std::vector<Field*> into);

} // namespace gf
