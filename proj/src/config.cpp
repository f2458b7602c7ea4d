// SPDX-License-Identifier: Apache-2.0
#include "percwalk/config.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <memory>
#include <stdexcept>

#include "percwalk/rng.hpp"

namespace percwalk {

namespace {
constexpr uint64_t kStreamBond = 0xB0ED;
constexpr uint64_t kStreamSite = 0x517E;
constexpr char kMagic[4] = {'P', 'C', 'L', 'B'};
constexpr uint16_t kFormatVersion = 1;
}  // namespace

int BondConfig::open_degree(std::span<const int64_t> vertex) const {
  int deg = 0;
  Coords t(vertex.begin(), vertex.end());
  for (int a = 0; a < box.dim(); ++a) {
    if (vertex[a] < box.hi[a] && open(a, t)) ++deg;
    if (vertex[a] > box.lo[a]) {
      t[a] -= 1;
      if (open(a, t)) ++deg;
      t[a] += 1;
    }
  }
  return deg;
}

BondConfig sample_bond_config(const Box& box, double p, uint64_t seed) {
  if (p < 0 || p > 1) throw std::invalid_argument("sample_bond_config: p not in [0,1]");
  BondConfig cfg;
  cfg.box = box;
  cfg.p = p;
  cfg.seed = seed;
  cfg.edges = EdgeIndexer(box);
  cfg.bits.resize(cfg.edges.edge_count());
  for (int64_t e = 0; e < cfg.bits.count; ++e)
    cfg.bits.set(e, philox_uniform(seed, kStreamBond, uint64_t(e)) < p);
  return cfg;
}

SiteConfig sample_site_config(const Box& box, double q, uint64_t seed) {
  if (q < 0 || q > 1) throw std::invalid_argument("sample_site_config: q not in [0,1]");
  SiteConfig cfg;
  cfg.box = box;
  cfg.q = q;
  cfg.seed = seed;
  cfg.bits.resize(box.vertex_count());
  for (int64_t v = 0; v < cfg.bits.count; ++v)
    cfg.bits.set(v, philox_uniform(seed, kStreamSite, uint64_t(v)) < q);
  return cfg;
}

BondConfig make_bond_config(const Box& box, BitArray bits, double p_nominal,
                            uint64_t seed_nominal) {
  BondConfig cfg;
  cfg.box = box;
  cfg.p = p_nominal;
  cfg.seed = seed_nominal;
  cfg.edges = EdgeIndexer(box);
  if (bits.count != cfg.edges.edge_count())
    throw std::invalid_argument("make_bond_config: bit count != edge count");
  cfg.bits = std::move(bits);
  return cfg;
}

SiteConfig make_site_field(const Box& box, BitArray bits, double q_nominal,
                           uint64_t seed_nominal) {
  if (bits.count != box.vertex_count())
    throw std::invalid_argument("make_site_field: bit count != vertex count");
  SiteConfig cfg;
  cfg.box = box;
  cfg.q = q_nominal;
  cfg.seed = seed_nominal;
  cfg.bits = std::move(bits);
  return cfg;
}

SiteConfig shift_sites(const SiteConfig& cfg, std::span<const int64_t> sigma) {
  int d = cfg.box.dim();
  if (int(sigma.size()) != d) throw std::invalid_argument("shift_sites: rank mismatch");
  int64_t l1 = 0;
  for (int a = 0; a < d; ++a) l1 += std::abs(sigma[a]);
  if (l1 > 1) throw std::invalid_argument("shift_sites: |sigma|_1 > 1");

  SiteConfig out;
  out.box = cfg.box;
  out.q = cfg.q;
  out.seed = cfg.seed;
  out.bits.resize(cfg.bits.count);
  Coords c(d);
  for (int64_t v = 0; v < out.bits.count; ++v) {
    cfg.box.coords_of(v, c.data());
    bool open = true;
    for (int a = 0; a < d; ++a) c[a] += sigma[a];
    if (!cfg.box.contains(c))
      open = false;
    else
      open = cfg.open(cfg.box.index_of(c));
    out.bits.set(v, open);
  }
  return out;
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

template <typename T>
void write_le(std::FILE* f, T v) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));  // little-endian host assumed; asserted below
  if (std::fwrite(buf, 1, sizeof(T), f) != sizeof(T))
    throw std::runtime_error("snapshot: write failed");
}

template <typename T>
T read_le(std::FILE* f) {
  unsigned char buf[sizeof(T)];
  if (std::fread(buf, 1, sizeof(T), f) != sizeof(T))
    throw std::runtime_error("snapshot: truncated file");
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

static_assert(std::endian::native == std::endian::little,
              "snapshot format is little-endian");

void write_header(std::FILE* f, ConfigKind kind, const Box& box, double prob,
                  uint64_t seed, int64_t bitcount) {
  std::fwrite(kMagic, 1, 4, f);
  write_le<uint16_t>(f, kFormatVersion);
  write_le<uint16_t>(f, uint16_t(kind));
  write_le<uint32_t>(f, uint32_t(box.dim()));
  for (int a = 0; a < box.dim(); ++a) {
    write_le<int32_t>(f, int32_t(box.lo[a]));
    write_le<int32_t>(f, int32_t(box.hi[a]));
  }
  write_le<double>(f, prob);
  write_le<uint64_t>(f, seed);
  write_le<uint64_t>(f, uint64_t(bitcount));
}

void write_bits(std::FILE* f, const BitArray& bits) {
  int64_t nbytes = (bits.count + 7) / 8;
  for (int64_t i = 0; i < nbytes; ++i) {
    unsigned char b = (bits.words[size_t(i >> 3)] >> ((i & 7) * 8)) & 0xFF;
    if (std::fwrite(&b, 1, 1, f) != 1) throw std::runtime_error("snapshot: write failed");
  }
}

struct Header {
  ConfigKind kind;
  Box box;
  double prob;
  uint64_t seed;
  int64_t bitcount;
};

Header read_header(std::FILE* f) {
  char magic[4];
  if (std::fread(magic, 1, 4, f) != 4 || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("snapshot: bad magic");
  uint16_t ver = read_le<uint16_t>(f);
  if (ver != kFormatVersion) throw std::runtime_error("snapshot: unsupported version");
  Header h;
  h.kind = ConfigKind(read_le<uint16_t>(f));
  uint32_t d = read_le<uint32_t>(f);
  Coords lo(d), hi(d);
  for (uint32_t a = 0; a < d; ++a) {
    lo[a] = read_le<int32_t>(f);
    hi[a] = read_le<int32_t>(f);
  }
  h.box = Box(std::move(lo), std::move(hi));
  h.prob = read_le<double>(f);
  h.seed = read_le<uint64_t>(f);
  h.bitcount = int64_t(read_le<uint64_t>(f));
  return h;
}

BitArray read_bits(std::FILE* f, int64_t bitcount) {
  BitArray bits;
  bits.resize(bitcount);
  int64_t nbytes = (bitcount + 7) / 8;
  for (int64_t i = 0; i < nbytes; ++i) {
    unsigned char b;
    if (std::fread(&b, 1, 1, f) != 1) throw std::runtime_error("snapshot: truncated bits");
    bits.words[size_t(i >> 3)] |= uint64_t(b) << ((i & 7) * 8);
  }
  return bits;
}

FilePtr open_file(const std::string& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw std::runtime_error("snapshot: cannot open " + path);
  return f;
}

}  // namespace

void save_snapshot(const BondConfig& cfg, const std::string& path) {
  auto f = open_file(path, "wb");
  write_header(f.get(), ConfigKind::Bond, cfg.box, cfg.p, cfg.seed, cfg.bits.count);
  write_bits(f.get(), cfg.bits);
}

void save_snapshot(const SiteConfig& cfg, const std::string& path) {
  auto f = open_file(path, "wb");
  write_header(f.get(), ConfigKind::Site, cfg.box, cfg.q, cfg.seed, cfg.bits.count);
  write_bits(f.get(), cfg.bits);
}

BondConfig load_bond_snapshot(const std::string& path) {
  auto f = open_file(path, "rb");
  Header h = read_header(f.get());
  if (h.kind != ConfigKind::Bond) throw std::runtime_error("snapshot: not a bond config");
  return make_bond_config(h.box, read_bits(f.get(), h.bitcount), h.prob, h.seed);
}

SiteConfig load_site_snapshot(const std::string& path) {
  auto f = open_file(path, "rb");
  Header h = read_header(f.get());
  if (h.kind != ConfigKind::Site) throw std::runtime_error("snapshot: not a site config");
  return make_site_field(h.box, read_bits(f.get(), h.bitcount), h.prob, h.seed);
}

}  // namespace percwalk
