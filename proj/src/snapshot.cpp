#include <cstring>
#include <fstream>

#include "sqe/noise.hpp"

namespace sqe {

namespace {

constexpr char kMagic[4] = {'S', 'Q', 'E', '1'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw std::runtime_error("truncated snapshot");
  return v;
}

}  // namespace

void write_snapshot(const DiagramSet& d, const std::filesystem::path& path) {
  if (d.diagrams.empty()) throw std::invalid_argument("empty diagram set");
  const double c = d.diagrams[0].fields.at(0).modes().cutoff();
  for (int k = 1; k <= d.n; ++k)
    for (auto& f : d.diagrams[k - 1].fields)
      if (f.modes().cutoff() != k * c) throw std::invalid_argument("snapshot expects <k> on the band k * cutoff");
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + tmp.string());
    os.write(kMagic, 4);
    put<std::uint32_t>(os, kVersion);
    put<std::uint32_t>(os, std::uint32_t(d.n));
    put<double>(os, c);
    put<double>(os, d.renorm);
    put<std::uint32_t>(os, std::uint32_t(d.origin));
    put<double>(os, d.origin_time);
    put<std::uint64_t>(os, d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
      put<double>(os, d.times()[i]);
      for (int k = 0; k < d.n; ++k)
        for (const cplx& z : d.diagrams[k].fields[i].coeffs()) {
          put<double>(os, z.real());
          put<double>(os, z.imag());
        }
    }
  }
  std::filesystem::rename(tmp, path);
}

DiagramSet read_snapshot(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw std::runtime_error("not a snapshot file");
  if (get<std::uint32_t>(is) != kVersion) throw std::runtime_error("unsupported snapshot version");
  DiagramSet d;
  d.n = int(get<std::uint32_t>(is));
  const double c = get<double>(is);
  d.renorm = get<double>(is);
  d.origin = DiagramOrigin(get<std::uint32_t>(is));
  d.origin_time = get<double>(is);
  const auto len = get<std::uint64_t>(is);
  d.diagrams.resize(d.n);
  std::vector<ModeSetPtr> bands;
  for (int k = 1; k <= d.n; ++k) bands.push_back(make_mode_set(k * c));
  for (std::uint64_t i = 0; i < len; ++i) {
    const double t = get<double>(is);
    for (int k = 0; k < d.n; ++k) {
      SpectralField f(bands[k]);
      for (auto& z : f.coeffs()) {
        double re = get<double>(is);
        double im = get<double>(is);
        z = {re, im};
      }
      d.diagrams[k].times.push_back(t);
      d.diagrams[k].fields.push_back(std::move(f));
    }
  }
  return d;
}

}  // namespace sqe
