#include "qpdyn/field_io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "qpdyn/errors.hpp"

namespace qpdyn {

static_assert(std::endian::native == std::endian::little,
              "field files are little-endian; big-endian hosts are unsupported");

namespace {

constexpr int kFormatVersion = 1;
constexpr const char* kMagic = "qpfield";

std::string axis_line(char name, const Grid1D& g) {
  std::ostringstream os;
  os << "axis " << name << " n=" << g.n << " origin=" << format_double(g.origin)
     << " step=" << format_double(g.step);
  return os.str();
}

void append_provenance(std::ostringstream& os, const Provenance& prov) {
  if (!prov.command.empty()) os << "prov command=" << prov.command << "\n";
  if (prov.seed) os << "prov seed=" << *prov.seed << "\n";
  if (!prov.config_hash.empty()) os << "prov config_hash=" << prov.config_hash << "\n";
}

void atomic_write(const std::filesystem::path& path, const std::string& header,
                  const void* payload, std::size_t payload_bytes) {
  const std::filesystem::path tmp = path.string() + ".tmp~";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + tmp.string());
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    out.write(static_cast<const char*>(payload), static_cast<std::streamsize>(payload_bytes));
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

struct Header {
  FieldKind kind = FieldKind::wavefn_q;
  std::string dtype;
  std::vector<std::pair<char, Grid1D>> axes;
  std::size_t payload_bytes = 0;
  std::size_t header_bytes = 0;
};

FieldKind parse_kind(const std::string& s) {
  if (s == "wavefn_q") return FieldKind::wavefn_q;
  if (s == "wavefn_p") return FieldKind::wavefn_p;
  if (s == "phase_field") return FieldKind::phase_field;
  if (s == "real_field") return FieldKind::real_field;
  throw IoError("unknown field kind: " + s);
}

double parse_double(const std::string& s, const std::string& context) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw IoError("bad number '" + s + "' in " + context);
  return v;
}

Header read_header(std::istream& in, const std::filesystem::path& path) {
  Header h;
  std::string line;
  std::size_t consumed = 0;

  auto next_line = [&]() {
    if (!std::getline(in, line)) throw IoError("truncated header: " + path.string());
    consumed += line.size() + 1;
  };

  next_line();
  {
    std::istringstream ls(line);
    std::string magic;
    int version = 0;
    ls >> magic >> version;
    if (magic != kMagic) throw IoError("not a field file: " + path.string());
    if (version != kFormatVersion)
      throw IoError("unknown format_version " + std::to_string(version) + ": " + path.string());
  }

  bool have_kind = false;
  while (true) {
    next_line();
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "kind") {
      std::string k;
      ls >> k;
      h.kind = parse_kind(k);
      have_kind = true;
    } else if (tag == "dtype") {
      ls >> h.dtype;
    } else if (tag == "layout") {
      std::string layout;
      ls >> layout;
      if (layout != "q-major") throw IoError("unsupported layout '" + layout + "'");
    } else if (tag == "axis") {
      char name = 0;
      ls >> name;
      Grid1D g;
      g.axis_kind = (name == 'p') ? AxisKind::momentum : AxisKind::position;
      std::string kv;
      while (ls >> kv) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw IoError("bad axis attribute '" + kv + "'");
        const std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
        if (key == "n")
          g.n = static_cast<std::size_t>(std::stoull(val));
        else if (key == "origin")
          g.origin = parse_double(val, "axis origin");
        else if (key == "step")
          g.step = parse_double(val, "axis step");
        else
          throw IoError("unknown axis attribute '" + key + "'");
      }
      if (g.n < 2 || !(g.step > 0.0)) throw IoError("bad axis in " + path.string());
      h.axes.emplace_back(name, g);
    } else if (tag == "prov") {
      // informational only
    } else if (tag == "payload_bytes") {
      std::string kv;
      std::istringstream ls2(line);
      ls2 >> kv >> h.payload_bytes;
      break;
    } else {
      throw IoError("unknown header line '" + line + "' in " + path.string());
    }
  }
  if (!have_kind) throw IoError("header missing kind: " + path.string());
  h.header_bytes = consumed;
  return h;
}

std::string header_text(FieldKind kind, const char* dtype,
                        const std::vector<std::pair<char, Grid1D>>& axes,
                        const Provenance& prov, std::size_t payload_bytes) {
  std::ostringstream os;
  os << kMagic << " " << kFormatVersion << "\n";
  os << "kind " << field_kind_name(kind) << "\n";
  os << "dtype " << dtype << "\n";
  os << "layout q-major\n";
  for (const auto& [name, g] : axes) os << axis_line(name, g) << "\n";
  append_provenance(os, prov);
  os << "payload_bytes " << payload_bytes << "\n";
  return os.str();
}

std::vector<char> read_payload(std::istream& in, const Header& h,
                               const std::filesystem::path& path) {
  std::vector<char> buf(h.payload_bytes);
  in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
  const std::size_t got = static_cast<std::size_t>(in.gcount());
  if (got != h.payload_bytes)
    throw IoError("truncated payload in " + path.string() + ": expected " +
                  std::to_string(h.payload_bytes) + " bytes, got " + std::to_string(got));
  return buf;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

FieldKind field_kind(const FieldVariant& f) {
  if (const auto* w = std::get_if<WaveFn>(&f))
    return w->space() == AxisKind::position ? FieldKind::wavefn_q : FieldKind::wavefn_p;
  if (std::holds_alternative<PhaseField>(f)) return FieldKind::phase_field;
  return FieldKind::real_field;
}

const char* field_kind_name(FieldKind k) {
  switch (k) {
    case FieldKind::wavefn_q: return "wavefn_q";
    case FieldKind::wavefn_p: return "wavefn_p";
    case FieldKind::phase_field: return "phase_field";
    case FieldKind::real_field: return "real_field";
  }
  return "?";
}

void write_field(const WaveFn& f, const std::filesystem::path& path, const Provenance& prov) {
  const FieldKind kind =
      f.space() == AxisKind::position ? FieldKind::wavefn_q : FieldKind::wavefn_p;
  const char axis_name = f.space() == AxisKind::position ? 'q' : 'p';
  const std::size_t bytes = f.values.size() * sizeof(Complex);
  const std::string header =
      header_text(kind, "complex128-le", {{axis_name, f.grid}}, prov, bytes);
  atomic_write(path, header, f.values.data(), bytes);
}

void write_field(const PhaseField& f, const std::filesystem::path& path, const Provenance& prov) {
  const std::size_t bytes = f.values.size() * sizeof(Complex);
  const std::string header = header_text(
      FieldKind::phase_field, "complex128-le",
      {{'q', f.grid.q_axis}, {'p', f.grid.p_axis}}, prov, bytes);
  atomic_write(path, header, f.values.data(), bytes);
}

void write_field(const RealField& f, const std::filesystem::path& path, const Provenance& prov) {
  const std::size_t bytes = f.values.size() * sizeof(double);
  const std::string header = header_text(
      FieldKind::real_field, "float64-le",
      {{'q', f.grid.q_axis}, {'p', f.grid.p_axis}}, prov, bytes);
  atomic_write(path, header, f.values.data(), bytes);
}

void write_field(const FieldVariant& f, const std::filesystem::path& path,
                 const Provenance& prov) {
  std::visit([&](const auto& field) { write_field(field, path, prov); }, f);
}

FieldVariant read_field(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path.string());
  const Header h = read_header(in, path);

  if (h.kind == FieldKind::wavefn_q || h.kind == FieldKind::wavefn_p) {
    if (h.axes.size() != 1) throw IoError("wavefn file needs exactly one axis: " + path.string());
    if (h.dtype != "complex128-le") throw IoError("bad dtype for wavefn: " + h.dtype);
    const Grid1D& g = h.axes[0].second;
    if (h.payload_bytes != g.n * sizeof(Complex))
      throw IoError("header/payload mismatch in " + path.string() + ": expected " +
                    std::to_string(g.n * sizeof(Complex)) + " bytes, header says " +
                    std::to_string(h.payload_bytes));
    const std::vector<char> buf = read_payload(in, h, path);
    WaveFn f{g, std::vector<Complex>(g.n)};
    std::memcpy(f.values.data(), buf.data(), buf.size());
    return f;
  }

  if (h.axes.size() != 2) throw IoError("2-D field needs two axes: " + path.string());
  const PhaseGrid pg{h.axes[0].second, h.axes[1].second};
  if (h.kind == FieldKind::phase_field) {
    if (h.dtype != "complex128-le") throw IoError("bad dtype for phase_field: " + h.dtype);
    if (h.payload_bytes != pg.size() * sizeof(Complex))
      throw IoError("header/payload mismatch in " + path.string() + ": expected " +
                    std::to_string(pg.size() * sizeof(Complex)) + " bytes, header says " +
                    std::to_string(h.payload_bytes));
    const std::vector<char> buf = read_payload(in, h, path);
    PhaseField f{pg, std::vector<Complex>(pg.size())};
    std::memcpy(f.values.data(), buf.data(), buf.size());
    return f;
  }
  if (h.dtype != "float64-le") throw IoError("bad dtype for real_field: " + h.dtype);
  if (h.payload_bytes != pg.size() * sizeof(double))
    throw IoError("header/payload mismatch in " + path.string() + ": expected " +
                  std::to_string(pg.size() * sizeof(double)) + " bytes, header says " +
                  std::to_string(h.payload_bytes));
  const std::vector<char> buf = read_payload(in, h, path);
  RealField f{pg, std::vector<double>(pg.size())};
  std::memcpy(f.values.data(), buf.data(), buf.size());
  return f;
}

WaveFn read_wavefn(const std::filesystem::path& path, AxisKind expected_space) {
  FieldVariant v = read_field(path);
  const FieldKind expected =
      expected_space == AxisKind::position ? FieldKind::wavefn_q : FieldKind::wavefn_p;
  if (const auto* w = std::get_if<WaveFn>(&v)) {
    if (w->space() == expected_space) return std::move(*w);
  }
  throw IoError("kind mismatch reading " + path.string() + ": expected " +
                field_kind_name(expected) + ", found " + field_kind_name(field_kind(v)));
}

PhaseField read_phase_field(const std::filesystem::path& path) {
  FieldVariant v = read_field(path);
  if (auto* f = std::get_if<PhaseField>(&v)) return std::move(*f);
  throw IoError("kind mismatch reading " + path.string() + ": expected phase_field, found " +
                field_kind_name(field_kind(v)));
}

RealField read_real_field(const std::filesystem::path& path) {
  FieldVariant v = read_field(path);
  if (auto* f = std::get_if<RealField>(&v)) return std::move(*f);
  throw IoError("kind mismatch reading " + path.string() + ": expected real_field, found " +
                field_kind_name(field_kind(v)));
}

namespace {

void csv_atomic(const std::filesystem::path& path, const std::string& text) {
  const std::filesystem::path tmp = path.string() + ".tmp~";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + tmp.string());
    out << text;
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

void write_csv(const WaveFn& f, const std::filesystem::path& path) {
  std::ostringstream os;
  os << (f.space() == AxisKind::position ? "q" : "p") << ",re,im\n";
  for (std::size_t j = 0; j < f.grid.n; ++j)
    os << format_double(f.grid.sample(j)) << "," << format_double(f.values[j].real()) << ","
       << format_double(f.values[j].imag()) << "\n";
  csv_atomic(path, os.str());
}

void write_csv(const PhaseField& f, const std::filesystem::path& path) {
  std::ostringstream os;
  os << "q,p,re,im\n";
  for (std::size_t iq = 0; iq < f.grid.q_axis.n; ++iq)
    for (std::size_t ip = 0; ip < f.grid.p_axis.n; ++ip) {
      const Complex v = f.at(iq, ip);
      os << format_double(f.grid.q_axis.sample(iq)) << ","
         << format_double(f.grid.p_axis.sample(ip)) << "," << format_double(v.real()) << ","
         << format_double(v.imag()) << "\n";
    }
  csv_atomic(path, os.str());
}

void write_csv(const RealField& f, const std::filesystem::path& path) {
  std::ostringstream os;
  os << "q,p,value\n";
  for (std::size_t iq = 0; iq < f.grid.q_axis.n; ++iq)
    for (std::size_t ip = 0; ip < f.grid.p_axis.n; ++ip)
      os << format_double(f.grid.q_axis.sample(iq)) << ","
         << format_double(f.grid.p_axis.sample(ip)) << "," << format_double(f.at(iq, ip))
         << "\n";
  csv_atomic(path, os.str());
}

void write_csv(const FieldVariant& f, const std::filesystem::path& path) {
  std::visit([&](const auto& field) { write_csv(field, path); }, f);
}

}  // namespace qpdyn
