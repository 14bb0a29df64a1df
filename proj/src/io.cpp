#include "cfm/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "cfm/error.hpp"

namespace cfm::io {

using nlohmann::json;

// Shortest text that parses back to the same double.
std::string format_real(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

class LineReader {
 public:
  explicit LineReader(std::istream& is) : is_(is) {}

  /// Next non-blank, non-comment line split into tokens; false at EOF.
  bool next(std::vector<std::string>& tokens) {
    std::string line;
    while (std::getline(is_, line)) {
      ++line_no_;
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') continue;
      tokens.clear();
      std::istringstream ss(line);
      for (std::string tok; ss >> tok;) tokens.push_back(tok);
      return true;
    }
    return false;
  }

  std::vector<std::string> expect(const char* what) {
    std::vector<std::string> tokens;
    if (!next(tokens)) fail(std::string("unexpected end of file, expected ") + what);
    return tokens;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("line " + std::to_string(line_no_) + ": " + msg);
  }

  int line_no() const { return line_no_; }

 private:
  std::istream& is_;
  int line_no_ = 0;
};

double parse_real(const LineReader& r, const std::string& tok) {
  double v = 0.0;
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end) r.fail("'" + tok + "' is not a real number");
  return v;
}

long long parse_int(const LineReader& r, const std::string& tok) {
  long long v = 0;
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end) r.fail("'" + tok + "' is not an integer");
  return v;
}

void read_header(LineReader& r, const char* magic, int version) {
  const auto tokens = r.expect("format header");
  if (tokens.size() != 2 || tokens[0] != magic)
    r.fail(std::string("expected header '") + magic + " <version>'");
  if (parse_int(r, tokens[1]) != version)
    r.fail("unsupported " + std::string(magic) + " version " + tokens[1]);
}

long long read_count(LineReader& r) {
  const auto tokens = r.expect("count line");
  if (tokens.size() != 2 || tokens[0] != "count") r.fail("expected 'count <n>'");
  const long long n = parse_int(r, tokens[1]);
  if (n < 0) r.fail("count must be non-negative");
  return n;
}

void expect_eof(LineReader& r) {
  std::vector<std::string> extra;
  if (r.next(extra)) r.fail("unexpected content after the declared records");
}

}  // namespace

void write_frames(std::ostream& os, const FrameSetFile& file) {
  if (file.units.empty() || file.units.find_first_of(" \t\r\n") != std::string::npos)
    throw InvalidArgument("write_frames: units must be a single non-empty word");
  os << "cfm-frames " << kFrameFormatVersion << "\n";
  os << "units " << file.units << "\n";
  os << "count " << file.frames.size() << "\n";
  os << "# a11 a21 a12 a22 x y\n";
  const Matrix6X& m = file.frames.matrix();
  for (Eigen::Index i = 0; i < m.cols(); ++i) {
    for (int k = 0; k < 6; ++k) os << (k ? " " : "") << format_real(m(k, i));
    os << "\n";
  }
}

FrameSetFile read_frames(std::istream& is) {
  LineReader r(is);
  read_header(r, "cfm-frames", kFrameFormatVersion);
  FrameSetFile out;
  auto units = r.expect("units line");
  if (units.size() != 2 || units[0] != "units") r.fail("expected 'units <name>'");
  out.units = units[1];
  const long long n = read_count(r);
  if (n < 1) r.fail("a frame set needs at least one frame");

  Matrix6X m(6, n);
  for (long long i = 0; i < n; ++i) {
    const auto tokens = r.expect("frame record");
    const std::string rec = "record " + std::to_string(i) + ": ";
    if (tokens.size() != 6)
      r.fail(rec + "expected 6 values (a11 a21 a12 a22 x y), got " + std::to_string(tokens.size()));
    for (int k = 0; k < 6; ++k) m(k, i) = parse_real(r, tokens[static_cast<std::size_t>(k)]);
    FeatureFrame f;
    f.a << m(0, i), m(2, i), m(1, i), m(3, i);
    f.x << m(4, i), m(5, i);
    if (!is_valid(f)) r.fail(rec + "frame is not finite or has a singular shape matrix");
  }
  expect_eof(r);
  out.frames = FrameSet(std::move(m));
  return out;
}

void write_truth(std::ostream& os, const std::vector<IndexPair>& pairs) {
  os << "cfm-truth " << kTruthFormatVersion << "\n";
  os << "count " << pairs.size() << "\n";
  os << "# model_index data_index\n";
  for (const auto& [m, n] : pairs) os << m << " " << n << "\n";
}

std::vector<IndexPair> read_truth(std::istream& is) {
  LineReader r(is);
  read_header(r, "cfm-truth", kTruthFormatVersion);
  const long long n = read_count(r);
  std::vector<IndexPair> out;
  out.reserve(static_cast<std::size_t>(n));
  for (long long i = 0; i < n; ++i) {
    const auto tokens = r.expect("pair record");
    if (tokens.size() != 2) r.fail("record " + std::to_string(i) + ": expected 'model data'");
    const long long a = parse_int(r, tokens[0]), b = parse_int(r, tokens[1]);
    if (a < 0 || b < 0) r.fail("record " + std::to_string(i) + ": indices must be non-negative");
    out.emplace_back(a, b);
  }
  expect_eof(r);
  return out;
}

// ---- result files ---------------------------------------------------------

namespace {

json mat_json(const Mat2& m) { return json::array({{m(0, 0), m(0, 1)}, {m(1, 0), m(1, 1)}}); }
json vec_json(const Vec2& v) { return json::array({v(0), v(1)}); }

Mat2 mat_from(const json& j) {
  Mat2 m;
  m << j.at(0).at(0).get<double>(), j.at(0).at(1).get<double>(), j.at(1).at(0).get<double>(),
      j.at(1).at(1).get<double>();
  return m;
}
Vec2 vec_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

const char* kBlockNames[] = {"dot", "ddot", "tdot"};

json config_json(const EngineConfig& c) {
  return {{"model", to_string(c.model_kind)},
          {"omega", c.omega_init},
          {"lambda", c.lambda},
          {"beta", c.beta},
          {"threshold", c.match_threshold},
          {"tol", c.tol},
          {"max_iters", c.max_iters},
          {"location_only", c.location_only},
          {"one_to_one", c.one_to_one},
          {"kernel_mode", to_string(c.kernel_mode)},
          {"omega_lo", c.omega_lo},
          {"omega_hi", c.omega_hi},
          {"var_floor", c.var_floor},
          {"normalize", c.normalize}};
}

EngineConfig config_from(const json& j) {
  EngineConfig c;
  c.model_kind = model_kind_from_string(j.at("model").get<std::string>());
  c.omega_init = j.at("omega").get<double>();
  c.lambda = j.at("lambda").get<double>();
  c.beta = j.at("beta").get<double>();
  c.match_threshold = j.at("threshold").get<double>();
  c.tol = j.at("tol").get<double>();
  c.max_iters = j.at("max_iters").get<int>();
  c.location_only = j.at("location_only").get<bool>();
  c.one_to_one = j.at("one_to_one").get<bool>();
  c.kernel_mode = kernel_mode_from_string(j.at("kernel_mode").get<std::string>());
  c.omega_lo = j.at("omega_lo").get<double>();
  c.omega_hi = j.at("omega_hi").get<double>();
  c.var_floor = j.at("var_floor").get<double>();
  c.normalize = j.at("normalize").get<bool>();
  return c;
}

json norm_json(const Normalization& n) {
  return {{"scale", n.scale}, {"data_mean", vec_json(n.data_mean)}, {"model_mean", vec_json(n.model_mean)}};
}

Normalization norm_from(const json& j) {
  Normalization n;
  n.scale = j.at("scale").get<std::array<double, 3>>();
  for (double c : n.scale)
    if (!(c > 0.0)) throw ParseError("normalization scales must be positive");
  n.data_mean = vec_from(j.at("data_mean"));
  n.model_mean = vec_from(j.at("model_mean"));
  return n;
}

json transform_json(const TransformParams& t) {
  if (const auto* r = std::get_if<RigidParams>(&t))
    return {{"kind", "rigid"}, {"s", r->s}, {"r", mat_json(r->r)}, {"t", vec_json(r->t)}};
  if (const auto* a = std::get_if<AffineParams>(&t))
    return {{"kind", "affine"},
            {"b", mat_json(a->b)},
            {"t", vec_json(a->t)},
            {"ridge_applied", a->ridge_applied},
            {"near_singular", a->near_singular}};
  const auto& nr = std::get<NonRigidParams>(t);
  json w = json::object();
  for (std::size_t k = 0; k < 3; ++k) {
    json rows = json::array();
    for (int i = 0; i < nr.w[k].rows(); ++i) {
      json row = json::array();
      for (Eigen::Index c = 0; c < nr.w[k].cols(); ++c) row.push_back(nr.w[k](i, c));
      rows.push_back(std::move(row));
    }
    w[kBlockNames[k]] = std::move(rows);
  }
  return {{"kind", "nonrigid"},
          {"beta", nr.beta},
          {"lambda", nr.lambda},
          {"kernel_mode", to_string(nr.mode)},
          {"normalization", norm_json(nr.norm)},
          {"w", std::move(w)}};
}

TransformParams transform_from(const json& j) {
  const auto kind = model_kind_from_string(j.at("kind").get<std::string>());
  if (kind == ModelKind::rigid) {
    RigidParams r;
    r.s = j.at("s").get<double>();
    r.r = mat_from(j.at("r"));
    r.t = vec_from(j.at("t"));
    return r;
  }
  if (kind == ModelKind::affine) {
    AffineParams a;
    a.b = mat_from(j.at("b"));
    a.t = vec_from(j.at("t"));
    a.ridge_applied = j.at("ridge_applied").get<bool>();
    a.near_singular = j.at("near_singular").get<bool>();
    return a;
  }
  NonRigidParams nr;
  nr.beta = j.at("beta").get<double>();
  nr.lambda = j.at("lambda").get<double>();
  nr.mode = kernel_mode_from_string(j.at("kernel_mode").get<std::string>());
  nr.norm = norm_from(j.at("normalization"));
  for (std::size_t k = 0; k < 3; ++k) {
    const json& rows = j.at("w").at(kBlockNames[k]);
    if (rows.empty()) continue;
    if (rows.size() != 2) throw ParseError(std::string("w.") + kBlockNames[k] + " must have 2 rows");
    const auto cols = static_cast<Eigen::Index>(rows.at(0).size());
    if (static_cast<Eigen::Index>(rows.at(1).size()) != cols)
      throw ParseError(std::string("w.") + kBlockNames[k] + " rows differ in length");
    nr.w[k].resize(2, cols);
    for (int i = 0; i < 2; ++i)
      for (Eigen::Index c = 0; c < cols; ++c)
        nr.w[k](i, c) = rows.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(c)).get<double>();
  }
  return nr;
}

bool same_transform(const TransformParams& a, const TransformParams& b) {
  if (a.index() != b.index()) return false;
  if (const auto* r = std::get_if<RigidParams>(&a)) return *r == std::get<RigidParams>(b);
  if (const auto* f = std::get_if<AffineParams>(&a)) return *f == std::get<AffineParams>(b);
  const auto& x = std::get<NonRigidParams>(a);
  const auto& y = std::get<NonRigidParams>(b);
  if (x.beta != y.beta || x.lambda != y.lambda || x.mode != y.mode || !(x.norm == y.norm))
    return false;
  for (std::size_t k = 0; k < 3; ++k) {
    if (x.w[k].cols() != y.w[k].cols()) return false;
    if (x.w[k].size() && x.w[k] != y.w[k]) return false;
  }
  return true;
}

bool same_config(const EngineConfig& a, const EngineConfig& b) {
  return config_json(a) == config_json(b);
}

}  // namespace

ResultFile make_result_file(const MatchResult& res, const EngineConfig& cfg) {
  ResultFile r;
  r.config = cfg;
  r.transform = res.transform;
  if (auto* nr = std::get_if<NonRigidParams>(&r.transform))
    for (auto& g : nr->g) g.resize(0, 0);
  r.correspondences = res.correspondences;
  r.q_trace = res.q_trace;
  r.iterations = res.iterations;
  r.converged = res.converged;
  r.status = res.status;
  r.omega = res.omega;
  r.covariance = res.covariance;
  return r;
}

std::string write_result(const ResultFile& r) {
  json corr = json::array();
  for (const auto& c : r.correspondences) corr.push_back({c.model_index, c.data_index, c.posterior});
  json j = {{"format", "cfm-result"},
            {"version", kResultFormatVersion},
            {"config", config_json(r.config)},
            {"transform", transform_json(r.transform)},
            {"correspondences", std::move(corr)},
            {"q_trace", r.q_trace},
            {"iterations", r.iterations},
            {"converged", r.converged},
            {"status", to_string(r.status)},
            {"omega", r.omega},
            {"covariance", r.covariance.var}};
  return j.dump(1) + "\n";
}

ResultFile read_result(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("result file: ") + e.what());
  }
  try {
    if (j.at("format") != "cfm-result") throw ParseError("result file: wrong format tag");
    if (j.at("version").get<int>() != kResultFormatVersion)
      throw ParseError("result file: unsupported version");
    ResultFile r;
    r.config = config_from(j.at("config"));
    r.transform = transform_from(j.at("transform"));
    for (const auto& c : j.at("correspondences"))
      r.correspondences.push_back(
          {c.at(0).get<Eigen::Index>(), c.at(1).get<Eigen::Index>(), c.at(2).get<double>()});
    r.q_trace = j.at("q_trace").get<std::vector<double>>();
    r.iterations = j.at("iterations").get<int>();
    r.converged = j.at("converged").get<bool>();
    r.status = status_from_string(j.at("status").get<std::string>());
    r.omega = j.at("omega").get<double>();
    r.covariance.var = j.at("covariance").get<std::array<double, 3>>();
    return r;
  } catch (const json::exception& e) {
    throw ParseError(std::string("result file: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("result file: ") + e.what());
  }
}

bool same_result(const ResultFile& a, const ResultFile& b) {
  return same_config(a.config, b.config) && same_transform(a.transform, b.transform) &&
         a.correspondences == b.correspondences && a.q_trace == b.q_trace &&
         a.iterations == b.iterations && a.converged == b.converged && a.status == b.status &&
         a.omega == b.omega && a.covariance == b.covariance;
}

// ---- benchmark CSV --------------------------------------------------------

void write_bench_csv(std::ostream& os, const std::vector<BenchRow>& rows) {
  os << kBenchHeader << "\n";
  for (const auto& row : rows) {
    const auto& s = row.summary;
    os << format_real(row.ratio) << "," << format_real(s.f1.mean) << "," << format_real(s.f1.variance)
       << "," << format_real(s.precision.mean) << "," << format_real(s.recall.mean) << ","
       << format_real(s.iterations.mean) << "," << format_real(s.iterations.variance) << ","
       << format_real(s.wall_time.mean) << "," << s.failures << ","
       << (s.config.location_only ? "location_only" : "full") << "\n";
  }
}

std::vector<BenchRecord> read_bench_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kBenchHeader)
    throw ParseError("line 1: unexpected benchmark CSV header");
  std::vector<BenchRecord> out;
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 10) throw ParseError("line " + std::to_string(line_no) + ": expected 10 columns");
    auto real = [&](std::size_t i) {
      double v = 0.0;
      const auto* end = f[i].data() + f[i].size();
      auto [ptr, ec] = std::from_chars(f[i].data(), end, v);
      if (ec != std::errc() || ptr != end)
        throw ParseError("line " + std::to_string(line_no) + ": bad number '" + f[i] + "'");
      return v;
    };
    out.push_back({real(0), real(1), real(2), real(3), real(4), real(5), real(6), real(7),
                   static_cast<int>(real(8)), f[9]});
  }
  return out;
}

// ---- paths ----------------------------------------------------------------

FrameSetFile load_frames(const std::filesystem::path& p) {
  std::ifstream is(p);
  if (!is) throw Error("cannot open " + p.string());
  try {
    return read_frames(is);
  } catch (const ParseError& e) {
    throw ParseError(p.string() + ": " + e.what());
  }
}

void save_frames(const std::filesystem::path& p, const FrameSetFile& f) {
  std::ofstream os(p);
  if (!os) throw Error("cannot write " + p.string());
  write_frames(os, f);
}

std::vector<IndexPair> load_truth(const std::filesystem::path& p) {
  std::ifstream is(p);
  if (!is) throw Error("cannot open " + p.string());
  try {
    return read_truth(is);
  } catch (const ParseError& e) {
    throw ParseError(p.string() + ": " + e.what());
  }
}

void save_truth(const std::filesystem::path& p, const std::vector<IndexPair>& pairs) {
  std::ofstream os(p);
  if (!os) throw Error("cannot write " + p.string());
  write_truth(os, pairs);
}

}  // namespace cfm::io
