#pragma once

#include "phasesim/grid.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace phasesim::snapshot {

/// On-disk frame: a structured-text metadata sidecar (.meta) plus a raw
/// payload (.bin) of 16 bytes per sample — real then imaginary as
/// little-endian 64-bit floats, row-major in declared axis order.
struct Header {
    std::string schema = "1.0";
    std::string run_id;
    std::string mode;
    std::string splitting = "potential-kinetic-potential";
    std::size_t step = 0;
    double time = 0.0;
    double hbar = 1.0;
    struct AxisEntry {
        std::string label;
        std::size_t n;
        double min, max;
        std::string rep;
    };
    std::vector<AxisEntry> axes;
    std::string T_text, U_text;
    std::map<std::string, double> params;
    std::map<std::string, double> summary;
    std::string payload_file;
    std::size_t payload_bytes = 0;
};

struct Record {
    Header header;
    Field field;
};

std::string meta_filename(std::size_t step);
std::string payload_filename(std::size_t step);

/// Writes snap_NNNNNN.meta + snap_NNNNNN.bin under dir. Axis entries,
/// payload name and byte count are filled from the field. A failed payload
/// write leaves an ABORTED marker file in dir and raises IoError.
void write(const std::filesystem::path& dir, Header header, const Field& f);

/// Reads a .meta sidecar and its payload. Rejects unknown schema major
/// versions and payloads whose size does not match the axis specs.
Record read(const std::filesystem::path& meta_path);

} // namespace phasesim::snapshot
