#include "mra/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

static_assert(std::endian::native == std::endian::little,
              "file formats are little-endian");

namespace mra::io {

namespace {

template <typename T>
void put(std::ofstream& f, const T& v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void get(std::ifstream& f, T& v, const char* what) {
  f.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!f) throw std::runtime_error(std::string(what) + ": truncated file");
}

void expect_magic(std::ifstream& f, const char* magic, const char* what) {
  char buf[4];
  f.read(buf, 4);
  if (!f || std::memcmp(buf, magic, 4) != 0)
    throw std::runtime_error(std::string(what) + ": bad magic");
}

std::ofstream open_out(const std::string& path, const char* what) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error(std::string(what) + ": cannot open for writing: " + path);
  return f;
}

std::ifstream open_in(const std::string& path, const char* what) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error(std::string(what) + ": cannot open: " + path);
  return f;
}

}  // namespace

void write_dataset(const forward::MraDataset& d, const std::string& path) {
  auto f = open_out(path, "dataset");
  f.write("MRA1", 4);
  put(f, d.L);
  put(f, d.N);
  put(f, d.sigma2);
  put(f, d.seed);
  const std::uint8_t has_shifts = d.true_shifts.empty() ? 0 : 1;
  put(f, has_shifts);
  f.write(reinterpret_cast<const char*>(d.obs.data()), sizeof(double) * d.obs.size());
  if (has_shifts)
    f.write(reinterpret_cast<const char*>(d.true_shifts.data()),
            sizeof(std::uint32_t) * d.true_shifts.size());
  if (!f) throw std::runtime_error("dataset: write failed: " + path);
}

forward::MraDataset read_dataset(const std::string& path) {
  auto f = open_in(path, "dataset");
  expect_magic(f, "MRA1", "dataset");
  forward::MraDataset d;
  std::uint8_t has_shifts;
  get(f, d.L, "dataset");
  get(f, d.N, "dataset");
  get(f, d.sigma2, "dataset");
  get(f, d.seed, "dataset");
  get(f, has_shifts, "dataset");
  if (d.L < 2 || d.N < 1) throw std::runtime_error("dataset: corrupt header");
  d.obs.resize(d.N * d.L);
  f.read(reinterpret_cast<char*>(d.obs.data()), sizeof(double) * d.obs.size());
  if (!f) throw std::runtime_error("dataset: truncated file");
  if (has_shifts) {
    d.true_shifts.resize(d.N);
    f.read(reinterpret_cast<char*>(d.true_shifts.data()),
           sizeof(std::uint32_t) * d.N);
    if (!f) throw std::runtime_error("dataset: truncated file");
  }
  return d;
}

void write_dataset_csv(const forward::MraDataset& d, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("dataset csv: cannot open " + path);
  for (std::uint64_t n = 0; n < d.N; ++n) {
    for (std::uint32_t j = 0; j < d.L; ++j)
      std::fprintf(f, j + 1 == d.L ? "%.17g" : "%.17g,", d.row(n)[j]);
    std::fputc('\n', f);
  }
  std::fclose(f);
}

void write_stats(const forward::SampleStats& s, const std::string& path) {
  auto f = open_out(path, "stats");
  f.write("MST1", 4);
  const std::uint32_t version = 1;
  put(f, version);
  put(f, s.L);
  put(f, s.N);
  put(f, s.sigma2);
  put(f, s.seed);
  put(f, s.mean);
  const std::uint32_t plen = static_cast<std::uint32_t>(s.pspec.comps.size());
  put(f, plen);
  f.write(reinterpret_cast<const char*>(s.pspec.comps.data()), sizeof(double) * plen);
  const std::uint8_t has_b = s.bispec ? 1 : 0;
  put(f, has_b);
  if (s.bispec)
    f.write(reinterpret_cast<const char*>(s.bispec->mat.data()),
            sizeof(std::complex<double>) * s.bispec->mat.size());
  if (!f) throw std::runtime_error("stats: write failed: " + path);
}

forward::SampleStats read_stats(const std::string& path) {
  auto f = open_in(path, "stats");
  expect_magic(f, "MST1", "stats");
  std::uint32_t version;
  get(f, version, "stats");
  if (version != 1) throw std::runtime_error("stats: unsupported version");
  forward::SampleStats s;
  get(f, s.L, "stats");
  get(f, s.N, "stats");
  get(f, s.sigma2, "stats");
  get(f, s.seed, "stats");
  get(f, s.mean, "stats");
  std::uint32_t plen;
  get(f, plen, "stats");
  if (plen != s.L / 2 + 1) throw std::runtime_error("stats: corrupt power spectrum");
  s.pspec.L = s.L;
  s.pspec.eta = make_eta(s.L);
  s.pspec.comps.resize(plen);
  f.read(reinterpret_cast<char*>(s.pspec.comps.data()), sizeof(double) * plen);
  std::uint8_t has_b;
  get(f, has_b, "stats");
  if (has_b) {
    forward::BispectrumMat b;
    b.L = s.L;
    b.mat.resize(static_cast<std::size_t>(s.L) * s.L);
    f.read(reinterpret_cast<char*>(b.mat.data()),
           sizeof(std::complex<double>) * b.mat.size());
    if (!f) throw std::runtime_error("stats: truncated file");
    s.bispec = std::move(b);
  }
  return s;
}

void write_signal(const Signal& x, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("signal: cannot open " + path);
  std::fprintf(f, "# mra-signal L=%zu\n", x.size());
  for (double v : x) std::fprintf(f, "%.17g\n", v);
  std::fclose(f);
}

Signal read_signal(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("signal: cannot open " + path);
  Signal x;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    x.push_back(std::stod(line));
  }
  if (x.size() < 2) throw std::runtime_error("signal: too short: " + path);
  return x;
}

void write_posterior_batch(const mps::PosteriorBatch& b, const std::string& path) {
  auto f = open_out(path, "posterior batch");
  f.write("PBS1", 4);
  const std::uint32_t version = 1;
  put(f, version);
  put(f, b.L);
  put(f, b.J);
  put(f, b.config.dt);
  const std::uint32_t mode = static_cast<std::uint32_t>(b.config.mode);
  put(f, mode);
  put(f, b.config.noise_factor);
  put(f, b.config.seed);
  put(f, b.ctx.N);
  put(f, b.ctx.sigma2);
  f.write(reinterpret_cast<const char*>(b.samples.data()),
          sizeof(double) * b.samples.size());
  put(f, b.medoid_index);
  f.write(reinterpret_cast<const char*>(b.shifts_to_medoid.data()),
          sizeof(std::uint32_t) * b.shifts_to_medoid.size());
  if (!f) throw std::runtime_error("posterior batch: write failed: " + path);
}

mps::PosteriorBatch read_posterior_batch(const std::string& path) {
  auto f = open_in(path, "posterior batch");
  expect_magic(f, "PBS1", "posterior batch");
  std::uint32_t version;
  get(f, version, "posterior batch");
  if (version != 1) throw std::runtime_error("posterior batch: unsupported version");
  mps::PosteriorBatch b;
  std::uint32_t mode;
  get(f, b.L, "posterior batch");
  get(f, b.J, "posterior batch");
  get(f, b.config.dt, "posterior batch");
  get(f, mode, "posterior batch");
  b.config.mode = static_cast<diffusion::Discretization>(mode);
  get(f, b.config.noise_factor, "posterior batch");
  get(f, b.config.seed, "posterior batch");
  get(f, b.ctx.N, "posterior batch");
  get(f, b.ctx.sigma2, "posterior batch");
  b.config.J = b.J;
  b.samples.resize(static_cast<std::size_t>(b.J) * b.L);
  f.read(reinterpret_cast<char*>(b.samples.data()), sizeof(double) * b.samples.size());
  get(f, b.medoid_index, "posterior batch");
  b.shifts_to_medoid.resize(b.J);
  f.read(reinterpret_cast<char*>(b.shifts_to_medoid.data()),
         sizeof(std::uint32_t) * b.J);
  if (!f) throw std::runtime_error("posterior batch: truncated file");
  return b;
}

void write_summary_csv(const mps::PosteriorSummary& s, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("summary: cannot open " + path);
  std::fprintf(f, "component,mean,q05,q50,q95,variance\n");
  for (std::size_t c = 0; c < s.mean.size(); ++c)
    std::fprintf(f, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g\n", c, s.mean[c], s.q05[c],
                 s.q50[c], s.q95[c], s.variance[c]);
  std::fclose(f);
}

}  // namespace mra::io
