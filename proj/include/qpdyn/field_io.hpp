#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>

#include "qpdyn/grid.hpp"

namespace qpdyn {

/// Free-form provenance recorded in every output header; sufficient to
/// regenerate the file (same binary + config + seed give bit-identical
/// payloads for deterministic operations).
struct Provenance {
  std::string command;
  std::optional<std::uint64_t> seed;
  std::string config_hash;
};

enum class FieldKind { wavefn_q, wavefn_p, phase_field, real_field };

using FieldVariant = std::variant<WaveFn, PhaseField, RealField>;

FieldKind field_kind(const FieldVariant& f);
const char* field_kind_name(FieldKind k);

/// Writes the self-describing container: a line-oriented text header
/// (grid parameters printed with 17 significant digits, so they read back
/// bit-exact) followed by a raw little-endian payload. Files are written
/// atomically (temp file + rename).
void write_field(const WaveFn& f, const std::filesystem::path& path, const Provenance& prov = {});
void write_field(const PhaseField& f, const std::filesystem::path& path,
                 const Provenance& prov = {});
void write_field(const RealField& f, const std::filesystem::path& path,
                 const Provenance& prov = {});
void write_field(const FieldVariant& f, const std::filesystem::path& path,
                 const Provenance& prov = {});

/// Reads any field file; throws IoError on truncation, unknown versions or
/// header/payload mismatches.
FieldVariant read_field(const std::filesystem::path& path);

/// Typed readers; a mismatched kind is an error naming both kinds.
WaveFn read_wavefn(const std::filesystem::path& path, AxisKind expected_space);
PhaseField read_phase_field(const std::filesystem::path& path);
RealField read_real_field(const std::filesystem::path& path);

/// CSV exports (17 significant digits): columns q,re,im / p,re,im for wave
/// functions, q,p,re,im for complex fields, q,p,value for real fields;
/// row order q-major.
void write_csv(const WaveFn& f, const std::filesystem::path& path);
void write_csv(const PhaseField& f, const std::filesystem::path& path);
void write_csv(const RealField& f, const std::filesystem::path& path);
void write_csv(const FieldVariant& f, const std::filesystem::path& path);

/// FNV-1a 64-bit hash, hex-encoded; used for config provenance.
std::string fnv1a_hex(std::string_view bytes);

/// %.17g formatting used across headers, CSV and reports.
std::string format_double(double v);

}  // namespace qpdyn
