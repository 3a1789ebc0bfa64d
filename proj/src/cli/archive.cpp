#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "termspace/cli.hpp"

namespace termspace::cli {

namespace {

class Writer {
 public:
  void bytes(const char* p, std::size_t n) { buf_.append(p, n); }
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void vec(const Eigen::Ref<const Vector>& v) {
    for (Index i = 0; i < v.size(); ++i) f64(v(i));
  }
  std::string take() { return std::move(buf_); }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(const std::string& s) : s_(s) {}
  const char* bytes(std::size_t n) {
    need(n);
    const char* p = s_.data() + pos_;
    pos_ += n;
    return p;
  }
  std::uint8_t u8() { return static_cast<std::uint8_t>(*bytes(1)); }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(u8()) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  Vector vec(Index n) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v(i) = f64();
    return v;
  }
  bool done() const { return pos_ == s_.size(); }

 private:
  void need(std::size_t n) const {
    if (s_.size() - pos_ < n) throw InvalidArgument("archive: truncated");
  }
  const std::string& s_;
  std::size_t pos_ = 0;
};

// Guards allocation sizes read from untrusted headers.
Index checked_count(std::uint64_t v, const char* what) {
  if (v > (std::uint64_t{1} << 31)) throw InvalidArgument(std::string("archive: implausible ") + what);
  return static_cast<Index>(v);
}

}  // namespace

std::string encode_archive(const TerminalEmbedder& e, std::uint64_t seed) {
  const GroundSet& g = e.ground();
  const Index d = e.input_dim(), m = e.target_dim();
  const Index n = g.is_finite() ? g.points().size() : 0;
  const Index l = e.cover() ? e.cover()->size() : 0;

  Writer w;
  w.bytes("TEMB", 4);
  w.u32(kArchiveVersion);
  w.u64(static_cast<std::uint64_t>(d));
  w.u64(static_cast<std::uint64_t>(m));
  w.u64(static_cast<std::uint64_t>(n));
  w.u8(static_cast<std::uint8_t>(e.variant()));
  w.u8(static_cast<std::uint8_t>(g.kind()));
  w.f64(e.budget().epsilon);
  w.u64(seed);
  w.f64(g.reach());
  w.u64(static_cast<std::uint64_t>(l));

  const Matrix& pi = e.projection().entries;
  for (Index i = 0; i < m; ++i) w.vec(pi.row(i).transpose());

  switch (g.kind()) {
    case ShapeKind::finite:
      for (Index j = 0; j < n; ++j) w.vec(g.points().point(j));
      break;
    case ShapeKind::circle:
      w.vec(g.center());
      w.f64(g.radius());
      w.vec(g.plane_basis().col(0));
      w.vec(g.plane_basis().col(1));
      break;
    case ShapeKind::sphere:
      w.vec(g.center());
      w.f64(g.radius());
      break;
  }
  if (l > 0) {
    for (Index j = 0; j < l; ++j) w.vec(e.cover()->centers.col(j));
    w.f64(e.cover()->radius);
    w.f64(e.cover()->verified_radius);
  }
  w.f64(e.projection().distortion_estimate);
  return w.take();
}

Archive decode_archive(const std::string& bytes) {
  Reader r(bytes);
  if (std::memcmp(r.bytes(4), "TEMB", 4) != 0) throw InvalidArgument("archive: bad magic");
  const std::uint32_t version = r.u32();
  if (version != kArchiveVersion) throw InvalidArgument("archive: unsupported version " + std::to_string(version));
  const Index d = checked_count(r.u64(), "dimension");
  const Index m = checked_count(r.u64(), "target dimension");
  const Index n = checked_count(r.u64(), "point count");
  const std::uint8_t variant = r.u8();
  const std::uint8_t kind = r.u8();
  const double epsilon = r.f64();
  const std::uint64_t seed = r.u64();
  const double reach = r.f64();
  const Index l = checked_count(r.u64(), "cover size");
  if (variant > 1) throw InvalidArgument("archive: bad variant");
  if (kind > 2) throw InvalidArgument("archive: bad ground kind");
  if (d < 1 || m < 1) throw InvalidArgument("archive: empty dimensions");

  ProjectionMatrix pi;
  pi.entries.resize(m, d);
  for (Index i = 0; i < m; ++i) pi.entries.row(i) = r.vec(d).transpose();
  pi.seed = seed;

  std::optional<GroundSet> ground;
  switch (static_cast<ShapeKind>(kind)) {
    case ShapeKind::finite: {
      Matrix pts(d, n);
      for (Index j = 0; j < n; ++j) pts.col(j) = r.vec(d);
      ground = GroundSet::finite(PointSet(std::move(pts)), reach);
      break;
    }
    case ShapeKind::circle: {
      Vector c = r.vec(d);
      const double radius = r.f64();
      Matrix basis(d, 2);
      basis.col(0) = r.vec(d);
      basis.col(1) = r.vec(d);
      ground = GroundSet::circle(std::move(c), radius, std::move(basis));
      break;
    }
    case ShapeKind::sphere: {
      Vector c = r.vec(d);
      const double radius = r.f64();
      ground = GroundSet::sphere(std::move(c), radius);
      break;
    }
  }

  std::optional<CoverSet> cover;
  if (l > 0) {
    CoverSet c;
    c.centers.resize(d, l);
    for (Index j = 0; j < l; ++j) c.centers.col(j) = r.vec(d);
    c.radius = r.f64();
    c.verified_radius = r.f64();
    cover = std::move(c);
  }
  pi.distortion_estimate = r.f64();
  if (!r.done()) throw InvalidArgument("archive: trailing bytes");

  const Variant v = static_cast<Variant>(variant);
  return Archive{seed, TerminalEmbedder(std::move(*ground), std::move(pi), make_budget(epsilon, v), v,
                                        std::move(cover))};
}

void save_archive(const std::string& path, const TerminalEmbedder& e, std::uint64_t seed) {
  write_file_atomic(path, encode_archive(e, seed));
}

Archive load_archive(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path);
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_archive(bytes);
}

}  // namespace termspace::cli
