#include "sbddc/cache.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "sbddc/errors.hpp"

namespace sbddc {

namespace {

constexpr char kKlMagic[8] = {'S', 'B', 'D', 'D', 'C', '-', 'K', 'L'};
constexpr char kOfflineMagic[8] = {'S', 'B', 'D', 'D', 'C', 'O', 'F', 'F'};
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  explicit Writer(const std::filesystem::path& file) : out_(file, std::ios::binary | std::ios::trunc) {
    if (!out_) throw std::runtime_error("cannot write " + file.string());
  }
  template <class T>
  void pod(const T& v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void bytes(const char* p, std::size_t n) { out_.write(p, static_cast<std::streamsize>(n)); }
  void str(const std::string& s) {
    pod<std::uint64_t>(s.size());
    bytes(s.data(), s.size());
  }
  void mat(const Eigen::MatrixXd& m) {
    pod<std::int64_t>(m.rows());
    pod<std::int64_t>(m.cols());
    bytes(reinterpret_cast<const char*>(m.data()), sizeof(double) * m.size());
  }
  void pc(const PCMatrix& p) {
    pod<std::int32_t>(p.set ? 1 : 0);
    if (!p.set) return;
    pod<std::int32_t>(p.set->dim());
    pod<std::int32_t>(p.set->degree());
    pod<std::int32_t>(p.terms());
    for (const auto& c : p.coeffs) mat(c);
  }
  void finish() {
    out_.flush();
    if (!out_) throw std::runtime_error("cache write failed");
  }

 private:
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& file) : in_(file, std::ios::binary) {}
  bool ok() const { return static_cast<bool>(in_); }
  template <class T>
  T pod() {
    T v{};
    in_.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in_) throw std::runtime_error("truncated cache file");
    return v;
  }
  void bytes(char* p, std::size_t n) {
    in_.read(p, static_cast<std::streamsize>(n));
    if (!in_) throw std::runtime_error("truncated cache file");
  }
  std::string str() {
    const auto n = pod<std::uint64_t>();
    if (n > (1u << 20)) throw std::runtime_error("corrupt cache file");
    std::string s(n, '\0');
    bytes(s.data(), n);
    return s;
  }
  Eigen::MatrixXd mat() {
    const auto r = pod<std::int64_t>();
    const auto c = pod<std::int64_t>();
    if (r < 0 || c < 0 || r * c > (1ll << 31)) throw std::runtime_error("corrupt cache file");
    Eigen::MatrixXd m(r, c);
    bytes(reinterpret_cast<char*>(m.data()), sizeof(double) * m.size());
    return m;
  }
  PCMatrix pc() {
    PCMatrix p;
    if (pod<std::int32_t>() == 0) return p;
    const int dim = pod<std::int32_t>();
    const int deg = pod<std::int32_t>();
    const int terms = pod<std::int32_t>();
    p.set = multi_index_set(dim, deg);
    if (terms != p.set->size()) throw std::runtime_error("corrupt cache file");
    for (int a = 0; a < terms; ++a) p.coeffs.push_back(mat());
    return p;
  }

 private:
  std::ifstream in_;
};

void write_header(Writer& w, const char* magic, const std::string& key) {
  w.bytes(magic, 8);
  w.pod(kVersion);
  w.pod(fnv1a(key));
  w.str(key);
}

bool read_header(Reader& r, const char* magic, const std::string& key) {
  char m[8];
  r.bytes(m, 8);
  if (std::memcmp(m, magic, 8) != 0) return false;
  if (r.pod<std::uint32_t>() != kVersion) return false;
  if (r.pod<std::uint64_t>() != fnv1a(key)) return false;
  return r.str() == key;
}

void write_basis(Writer& w, const KLBasis& b) {
  w.mat(b.lambdas);
  w.mat(b.modes);
  w.mat(b.weights);
  w.pod(b.total_variance);
}

KLBasis read_basis(Reader& r) {
  KLBasis b;
  b.lambdas = r.mat();
  b.modes = r.mat();
  b.weights = r.mat();
  b.total_variance = r.pod<double>();
  return b;
}

// Write to a temporary name first so readers never see partial files.
template <class F>
void atomic_write(const std::filesystem::path& file, F&& body) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::filesystem::path tmp = file;
  tmp += ".tmp";
  {
    Writer w(tmp);
    body(w);
    w.finish();
  }
  std::filesystem::rename(tmp, file);
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string kl_cache_key(int ns, int n, const CovarianceSpec& spec, int m, bool global) {
  std::ostringstream os;
  os.precision(17);
  os << "kl ns=" << ns << " n=" << n << " sigma2=" << spec.sigma2 << " ell=" << spec.ell << " m=" << m
     << " scope=" << (global ? "global" : "local");
  return os.str();
}

std::string offline_cache_key(int ns, int n, const CovarianceSpec& spec, const OfflineOptions& o) {
  std::ostringstream os;
  os.precision(17);
  os << "offline ns=" << ns << " n=" << n << " sigma2=" << spec.sigma2 << " ell=" << spec.ell
     << " nkl=" << o.nkl << " d=" << o.degree << " method=" << method_name(o.method);
  if (o.method == Method::Sc) os << " q=" << o.quad_points();
  os << " surrogate=" << o.surrogate;
  return os.str();
}

void save_kl(const std::filesystem::path& file, const std::string& key, const KLBasis& basis) {
  atomic_write(file, [&](Writer& w) {
    write_header(w, kKlMagic, key);
    write_basis(w, basis);
  });
}

std::optional<KLBasis> load_kl(const std::filesystem::path& file, const std::string& key) {
  Reader r(file);
  if (!r.ok()) return std::nullopt;
  try {
    if (!read_header(r, kKlMagic, key)) return std::nullopt;
    return read_basis(r);
  } catch (const std::runtime_error&) {
    return std::nullopt;
  }
}

void save_offline(const std::filesystem::path& file, const OfflineStore& s) {
  const std::string key = offline_cache_key(s.ns, s.n, s.spec, s.options);
  atomic_write(file, [&](Writer& w) {
    write_header(w, kOfflineMagic, key);
    w.pod<std::int32_t>(s.ns);
    w.pod<std::int32_t>(s.n);
    w.pod(s.spec.sigma2);
    w.pod(s.spec.ell);
    w.pod<std::int32_t>(static_cast<std::int32_t>(s.options.method));
    w.pod<std::int32_t>(s.options.nkl);
    w.pod<std::int32_t>(s.options.degree);
    w.pod<std::int32_t>(s.options.surrogate);
    w.pod<std::int32_t>(s.options.force_cg);
    w.pod<std::int32_t>(s.options.dense_limit);
    w.pod<std::int32_t>(s.options.quad);
    write_basis(w, s.basis);
    w.pod<std::int64_t>(static_cast<std::int64_t>(s.class_of.size()));
    for (int c : s.class_of) w.pod<std::int32_t>(c);
    w.pod<std::int64_t>(static_cast<std::int64_t>(s.classes.size()));
    for (const auto& c : s.classes) {
      w.pod<std::int32_t>(c.representative);
      for (const PCMatrix* p : {&c.inv_dd, &c.x_d, &c.s_pi, &c.r_rr, &c.a_cr, &c.h_pi, &c.s_gamma, &c.x_i, &c.r_ii,
                                &c.a_gi, &c.a_gg})
        w.pc(*p);
    }
    w.pod<std::int64_t>(static_cast<std::int64_t>(s.rhs.size()));
    for (const auto& r : s.rhs) {
      w.pc(r.y_f);
      w.pc(r.z_f);
    }
    w.pod(s.build_seconds);
  });
}

std::optional<OfflineStore> load_offline(const std::filesystem::path& file, const std::string& key) {
  Reader r(file);
  if (!r.ok()) return std::nullopt;
  try {
    if (!read_header(r, kOfflineMagic, key)) return std::nullopt;
    OfflineStore s;
    s.ns = r.pod<std::int32_t>();
    s.n = r.pod<std::int32_t>();
    s.spec.sigma2 = r.pod<double>();
    s.spec.ell = r.pod<double>();
    s.options.method = static_cast<Method>(r.pod<std::int32_t>());
    s.options.nkl = r.pod<std::int32_t>();
    s.options.degree = r.pod<std::int32_t>();
    s.options.surrogate = r.pod<std::int32_t>() != 0;
    s.set_d = multi_index_set(s.options.nkl, s.options.degree);
    s.options.force_cg = r.pod<std::int32_t>() != 0;
    s.options.dense_limit = r.pod<std::int32_t>();
    s.options.quad = r.pod<std::int32_t>();
    s.basis = read_basis(r);
    const auto nsub = r.pod<std::int64_t>();
    for (std::int64_t k = 0; k < nsub; ++k) s.class_of.push_back(r.pod<std::int32_t>());
    const auto ncls = r.pod<std::int64_t>();
    for (std::int64_t k = 0; k < ncls; ++k) {
      ClassComponents c;
      c.representative = r.pod<std::int32_t>();
      for (PCMatrix* p : {&c.inv_dd, &c.x_d, &c.s_pi, &c.r_rr, &c.a_cr, &c.h_pi, &c.s_gamma, &c.x_i, &c.r_ii, &c.a_gi,
                          &c.a_gg})
        *p = r.pc();
      s.classes.push_back(std::move(c));
    }
    const auto nrhs = r.pod<std::int64_t>();
    for (std::int64_t k = 0; k < nrhs; ++k) {
      RhsPc rp;
      rp.y_f = r.pc();
      rp.z_f = r.pc();
      s.rhs.push_back(std::move(rp));
    }
    s.build_seconds = r.pod<double>();
    return s;
  } catch (const std::runtime_error&) {
    return std::nullopt;
  }
}

KLBasis cached_global_kl(const std::filesystem::path& dir, const Mesh& mesh, const CovarianceSpec& spec, int m) {
  if (dir.empty()) return global_kl(mesh, spec, m);
  const std::string key = kl_cache_key(mesh.ns(), mesh.n(), spec, m, true);
  const auto file = dir / ("kl-" + hex(fnv1a(key)) + ".bin");
  if (auto b = load_kl(file, key)) return *b;
  KLBasis b = global_kl(mesh, spec, m);
  save_kl(file, key, b);
  return b;
}

OfflineStore cached_offline(const std::filesystem::path& dir, const Mesh& mesh, const DofPartition& dofs,
                            const CovarianceSpec& spec, const OfflineOptions& opts, const Eigen::VectorXd& load) {
  if (dir.empty()) return build_offline(mesh, dofs, spec, opts, load);
  const std::string key = offline_cache_key(mesh.ns(), mesh.n(), spec, opts);
  const auto file = dir / ("offline-" + hex(fnv1a(key)) + ".bin");
  if (auto s = load_offline(file, key)) return std::move(*s);
  OfflineStore s = build_offline(mesh, dofs, spec, opts, load);
  save_offline(file, s);
  return s;
}

}  // namespace sbddc
