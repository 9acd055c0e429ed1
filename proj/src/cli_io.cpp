#include "ipslab/cli_io.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "ipslab/braco_resem.hpp"
#include "ipslab/contact.hpp"
#include "ipslab/error.hpp"
#include "ipslab/oracle.hpp"
#include "ipslab/pde_solvers.hpp"
#include "ipslab/wf_renorm.hpp"
#include "json.hpp"

namespace ipslab {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw Error("config: key '" + key + "' expects a number, got '" + text + "'");
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// Config

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string fmt_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

Config Config::parse(std::string_view text, std::set<std::string> allowed) {
  Config c(std::move(allowed));
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    if (line.find('=') == std::string::npos)
      throw Error("config: line " + std::to_string(line_no) + " is not of the form key=value");
    c.assign(line);
  }
  return c;
}

Config Config::load(const std::filesystem::path& file, std::set<std::string> allowed) {
  std::ifstream in(file);
  if (!in) throw Error("config: cannot open " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), std::move(allowed));
}

void Config::set(const std::string& key, const std::string& value) {
  const std::string k = trim(key);
  if (k.empty()) throw Error("config: empty key");
  if (!allowed_.empty() && allowed_.count(k) == 0) throw Error("config: unknown key '" + k + "'");
  values_[k] = trim(value);
}

void Config::assign(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw Error("config: expected key=value, got '" + std::string(assignment) + "'");
  set(std::string(assignment.substr(0, eq)), std::string(assignment.substr(eq + 1)));
}

std::string Config::str(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::num(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_double(key, it->second);
}

long Config::integer(const std::string& key, long fallback) const {
  const double v = num(key, static_cast<double>(fallback));
  if (v != std::floor(v)) throw Error("config: key '" + key + "' expects an integer");
  return static_cast<long>(v);
}

std::vector<double> Config::list(const std::string& key, const std::vector<double>& fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<double> out;
  std::stringstream ss(it->second);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, item));
  if (out.empty()) throw Error("config: key '" + key + "' has an empty list");
  return out;
}

std::string Config::canonical() const {
  std::string s;
  for (const auto& [k, v] : values_) s += k + "=" + v + "\n";
  return s;
}

std::uint64_t Config::hash() const { return fnv1a(canonical()); }

std::string Config::hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash()));
  return buf;
}

// ---------------------------------------------------------------------------
// writers

CsvWriter::CsvWriter(std::ostream& out, std::vector<std::string> header) : out_(out), cols_(header.size()) {
  require(cols_ > 0, "CsvWriter: header row is mandatory");
  row(header);
  rows_ = 0;
}

std::string CsvWriter::quote(const std::string& cell) {
  if (cell.find_first_of(",\"\r\n") == std::string::npos) return cell;
  std::string q = "\"";
  for (char ch : cell) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  require(cells.size() == cols_, "CsvWriter: row has the wrong number of cells");
  for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << quote(cells[i]);
  out_ << "\r\n";
  ++rows_;
}

void CsvWriter::row_numbers(const std::vector<double>& cells) {
  std::vector<std::string> s;
  s.reserve(cells.size());
  for (double v : cells) s.push_back(fmt_double(v));
  row(s);
}

bool ResultRecord::passed() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

std::string ResultRecord::to_json_line() const {
  nlohmann::json j;
  j["experiment"] = experiment;
  j["config_hash"] = config_hash;
  j["stats"] = nlohmann::json::array();
  for (const auto& s : stats) {
    nlohmann::json e{{"name", s.name}, {"mean", s.value.mean}};
    if (s.value.exact)
      e["se"] = "exact";
    else
      e["se"] = s.value.se;
    j["stats"].push_back(e);
  }
  j["verdicts"] = nlohmann::json::array();
  for (const auto& v : verdicts) j["verdicts"].push_back({{"name", v.name}, {"pass", v.pass}, {"detail", v.detail}});
  j["wall_time"] = wall_time;
  return j.dump();
}

void write_columns(std::ostream& out, const std::vector<std::vector<double>>& rows) {
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? " " : "") << fmt_double(r[i]);
    out << "\n";
  }
}

// ---------------------------------------------------------------------------
// functions, lattices, kernels

std::function<double(double)> named_function(const std::string& name, double scale) {
  using F = double (*)(double);
  static const std::map<std::string, F> table{
      {"zero", [](double) { return 0.0; }},
      {"one", [](double) { return 1.0; }},
      {"x", [](double x) { return x; }},
      {"1-x", [](double x) { return 1.0 - x; }},
      {"x^2", [](double x) { return x * x; }},
      {"x(1-x)", [](double x) { return x * (1.0 - x); }},
      {"1-(1-x)^7", [](double x) { return 1.0 - std::pow(1.0 - x, 7); }},
  };
  const auto it = table.find(name);
  if (it == table.end()) throw Error("unknown function '" + name + "'");
  const F f = it->second;
  return [f, scale](double x) { return scale * f(x); };
}

GroupLattice lattice_from(const Config& c) {
  const std::string kind = c.str("lattice", "torus");
  if (kind == "torus") {
    const std::string b = c.str("boundary", "periodic");
    if (b != "periodic" && b != "killed") throw Error("config: key 'boundary' must be periodic or killed");
    return GroupLattice::torus(static_cast<int>(c.integer("dim", 1)), static_cast<int>(c.integer("side", 8)),
                               b == "killed" ? Boundary::killed : Boundary::periodic);
  }
  if (kind == "tree")
    return GroupLattice::tree_ball(static_cast<int>(c.integer("branch", 2)), static_cast<int>(c.integer("depth", 3)));
  if (kind == "hierarchical")
    return GroupLattice::hierarchical(static_cast<int>(c.integer("branch", 2)),
                                      static_cast<int>(c.integer("depth", 3)));
  throw Error("config: key 'lattice' must be torus, tree or hierarchical");
}

Kernel kernel_from(const Config& c, const GroupLattice& lat) {
  const std::string kind = c.str("kernel", lat.kind() == LatticeKind::hierarchical ? "hier" : "nn");
  if (kind == "nn") return nearest_neighbor_kernel(lat, c.num("rate", 1.0));
  if (kind == "drift") return drift_kernel_1d(lat, c.num("right", 1.0), c.num("left", 1.0));
  if (kind == "isolated") return isolated_kernel(lat.size());
  if (kind == "hier") {
    const double ratio = c.num("hier_ratio", 4.0);
    return hierarchical_kernel(lat, [ratio](int k) { return std::pow(ratio, -k); });
  }
  throw Error("config: key 'kernel' must be nn, drift, isolated or hier");
}

// ---------------------------------------------------------------------------
// subcommands

namespace {

const std::set<std::string> kCommon{"seed", "reps", "batch"};
const std::set<std::string> kLattice{"lattice", "dim",   "side", "boundary", "depth",     "branch",
                                     "kernel",  "rate",  "right", "left",    "hier_ratio"};

std::set<std::string> with(std::set<std::string> a, std::initializer_list<std::set<std::string>> more) {
  for (const auto& s : more) a.insert(s.begin(), s.end());
  return a;
}

struct Context {
  const Config& cfg;
  const RunOptions& opt;
  std::string sub;
  std::uint64_t seed;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  std::ofstream jsonl;

  Context(const std::string& s, const Config& c, const RunOptions& o)
      : cfg(c), opt(o), sub(s), seed(static_cast<std::uint64_t>(c.integer("seed", 1))) {
    std::filesystem::create_directories(o.out_dir);
    jsonl.open(o.out_dir / (s + ".jsonl"));
  }

  std::ofstream file(const std::string& ext) const { return std::ofstream(opt.out_dir / (sub + ext)); }

  ResultRecord record(const std::string& name) const {
    ResultRecord r;
    r.experiment = name;
    r.config_hash = cfg.hash_hex();
    r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
  }

  // Writes the record immediately so an abort loses at most the current batch.
  void flush(const ResultRecord& r) {
    jsonl << r.to_json_line() << "\n";
    jsonl.flush();
    if (opt.log)
      for (const auto& v : r.verdicts)
        *opt.log << (v.pass ? "PASS " : "FAIL ") << r.experiment << ": " << v.name
                 << (v.detail.empty() ? "" : " (" + v.detail + ")") << "\n";
  }
};

// Batches of global replica indices [lo, hi).
std::vector<std::pair<std::size_t, std::size_t>> batches(const Config& c, std::size_t default_reps) {
  const auto reps = static_cast<std::size_t>(c.integer("reps", static_cast<long>(default_reps)));
  const auto size = static_cast<std::size_t>(std::max<long>(1, c.integer("batch", static_cast<long>(reps))));
  require(reps >= 1, "config: key 'reps' must be >= 1");
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t lo = 0; lo < reps; lo += size) out.emplace_back(lo, std::min(reps, lo + size));
  return out;
}

BcdParams bcd_from(const Config& c) {
  const auto lat = lattice_from(c);
  BcdParams p;
  p.kernel = kernel_from(c, lat);
  p.b = c.num("b", 1.0);
  p.c = c.num("c", 1.0);
  p.d = c.num("d", 1.0);
  p.dt = c.num("dt", 1e-3);
  p.guard = c.num("guard", 1e7);
  p.validate();
  return p;
}

// A single value means "at the origin" for counts and "everywhere" for densities.
CountConfig counts_from(const Config& c, const std::string& key, std::size_t n, double fallback) {
  const auto v = c.list(key, {fallback});
  CountConfig x(n, 0);
  if (v.size() == 1) {
    x[0] = static_cast<long>(v[0]);
    return x;
  }
  if (v.size() != n) throw Error("config: key '" + key + "' needs 1 or " + std::to_string(n) + " entries");
  for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<long>(v[i]);
  return x;
}

DensityConfig density_from(const Config& c, const std::string& key, std::size_t n, double fallback) {
  const auto v = c.list(key, {fallback});
  if (v.size() == 1) return DensityConfig(n, v[0]);
  if (v.size() != n) throw Error("config: key '" + key + "' needs 1 or " + std::to_string(n) + " entries");
  return v;
}

// Mean of per-replica rows, with SEs, written as (t, mean, se) and one JSON line per batch.
template <class Replica>
std::vector<ResultRecord> time_series(Context& ctx, const std::vector<double>& t_grid, Replica&& one) {
  const Stream root(ctx.seed);
  std::vector<RunningStats> all(t_grid.size());
  std::vector<ResultRecord> out;
  for (const auto& [lo, hi] : batches(ctx.cfg, 1000)) {
    const auto rows = map_replicas(hi - lo, [&](std::size_t r) { return one(root.child(lo + r)); });
    std::vector<RunningStats> part(t_grid.size());
    for (const auto& row : rows)
      for (std::size_t k = 0; k < t_grid.size(); ++k) {
        part[k].add(row[k]);
        all[k].add(row[k]);
      }
    auto rec = ctx.record(ctx.sub + " batch " + std::to_string(lo) + "-" + std::to_string(hi));
    for (std::size_t k = 0; k < t_grid.size(); ++k)
      rec.stats.push_back({"t=" + fmt_double(t_grid[k]), part[k].estimate()});
    ctx.flush(rec);
    out.push_back(std::move(rec));
  }
  auto csv_file = ctx.file(".csv");
  CsvWriter csv(csv_file, {"t", "mean", "se"});
  for (std::size_t k = 0; k < t_grid.size(); ++k) csv.row_numbers({t_grid[k], all[k].mean(), all[k].se()});
  return out;
}

std::vector<ResultRecord> run_verify(Context& ctx) {
  auto rec = ctx.record("verify");
  auto csv_file = ctx.file(".csv");
  CsvWriter csv(csv_file, {"check", "value", "tolerance", "pass"});
  auto check = [&](const std::string& name, double err, double tol) {
    const bool ok = std::isfinite(err) && err <= tol;
    rec.stats.push_back({name, Estimate::exact_value(err)});
    rec.verdicts.push_back({name, ok, "error " + fmt_double(err)});
    csv.row({name, fmt_double(err), fmt_double(tol), ok ? "1" : "0"});
  };
  const auto cycle = GroupLattice::torus(1, 4);
  const auto sym = nearest_neighbor_kernel(cycle, 1.0), asym = drift_kernel_1d(cycle, 2.0, 1.0);
  for (double t : {0.5, 1.0, 2.0}) {
    check("contact duality gap, symmetric, t=" + fmt_double(t), contact_duality_gap(sym, 1.0, t), 1e-9);
    check("contact duality gap, asymmetric, t=" + fmt_double(t), contact_duality_gap(asym, 1.0, t), 1e-9);
  }
  double fix = 0.0;
  for (int i = 0; i <= 20; ++i)
    for (double g : {0.1, 0.5, 1.0, 2.0}) {
      const double x = i / 20.0;
      fix = std::max(fix, std::abs(beta_moment(x, g, 1) - beta_moment(x, g, 2) - x * (1 - x) / (1 + g)));
    }
  check("fixed shape identity", fix, 1e-12);
  check("beta moment (0.5,1,2)", std::abs(beta_moment(0.5, 1.0, 2) - 0.375), 1e-15);
  check("U constant r=2 gamma=1", std::abs(u_gamma_constant(2.0, 1.0) - 4.0 / 3.0), 1e-15);
  check("maximal bound r=2", std::abs(maximal_bound(1, 1, 0, std::numbers::ln2) - 8.0 / 3.0), 1e-12);
  check("maximal bound r=0", std::abs(maximal_bound(0, 1, 1, 2.0) - 0.5), 1e-12);
  check("maximal bound r=-1", std::abs(maximal_bound(0, 1, 2, std::numbers::ln2) - 1.0), 1e-12);
  check("size-biased moment x=0 gamma=1", std::abs(kyy_moment(0.0, 1.0) - 1.0 / 6.0), 1e-15);
  check("reservoir mean m=2 gamma=1", std::abs(psi_mean(2, 1.0) - 1.5), 1e-15);
  const auto star = DiffMatrixField::sample([](double a, double) { return a * (1 - a); },
                                            [](double, double) { return 0.0; },
                                            [](double, double b) { return b * (1 - b); });
  check("flow residual at the quadratic fixed point", flow_residual(star), 1e-8);
  const auto ps = pstar_shoot(1.0, 0, 1);
  check("p* residual alpha=1", ps.residual, 1e-6);
  check("p* boundary identity at 0", ps.boundary_left, 1e-3);
  check("p* boundary identity at 1", ps.boundary_right, 1e-3);
  ctx.flush(rec);
  return {rec};
}

std::vector<ResultRecord> run_contact(Context& ctx) {
  const auto lat = lattice_from(ctx.cfg);
  ContactModel m{lat, kernel_from(ctx.cfg, lat), ctx.cfg.num("delta", 1.0)};
  const auto t_grid = ctx.cfg.list("t_grid", {0.5, 1.0, 2.0});
  const std::string init = ctx.cfg.str("init", "origin");
  if (init != "origin" && init != "full") throw Error("config: key 'init' must be origin or full");
  const SiteSet A = init == "full" ? SiteSet::full(lat.size()) : SiteSet::of(lat.size(), {lat.origin()});
  const double T = *std::max_element(t_grid.begin(), t_grid.end());
  return time_series(ctx, t_grid, [&](const Stream& s) {
    const auto rep = sample_graphical(m.kernel, m.delta, T, s);
    std::vector<double> row;
    for (double t : t_grid) row.push_back(static_cast<double>(forward(rep, A, 0.0, t).count()));
    return row;
  });
}

std::vector<ResultRecord> run_braco(Context& ctx) {
  const auto p = bcd_from(ctx.cfg);
  const auto x0 = counts_from(ctx.cfg, "x0", p.kernel.n, 1.0);
  const auto t_grid = ctx.cfg.list("t_grid", {0.5, 1.0, 2.0});
  return time_series(ctx, t_grid, [&](const Stream& s) {
    Engine eng = s.engine();
    std::vector<double> row;
    for (const auto& x : braco_path(p, x0, t_grid, eng)) row.push_back(static_cast<double>(total(x)));
    return row;
  });
}

std::vector<ResultRecord> run_resem(Context& ctx) {
  const auto p = bcd_from(ctx.cfg);
  const auto phi0 = density_from(ctx.cfg, "phi0", p.kernel.n, 0.5);
  const auto t_grid = ctx.cfg.list("t_grid", {0.5, 1.0, 2.0});
  return time_series(ctx, t_grid, [&](const Stream& s) {
    Engine eng = s.engine();
    std::vector<double> row;
    for (const auto& x : resem_path(p, phi0, t_grid, eng)) row.push_back(total(x));
    return row;
  });
}

std::vector<ResultRecord> run_dualitytest(Context& ctx) {
  const auto p = bcd_from(ctx.cfg);
  const std::size_t n = p.kernel.n;
  const std::string kind = ctx.cfg.str("kind", "moment");
  const double t = ctx.cfg.num("t", 1.0);
  const auto reps = static_cast<std::size_t>(ctx.cfg.integer("reps", 10000));
  const auto phi = density_from(ctx.cfg, "phi", n, 0.5);
  std::vector<std::pair<std::string, DualityResult>> results;
  if (kind == "moment") {
    const auto x = counts_from(ctx.cfg, "x", n, 2.0);
    results.emplace_back("moment", duality_test(p, x, phi, t, reps, ctx.seed,
                                                static_cast<int>(ctx.cfg.integer("oracle_cap", 0))));
  } else if (kind == "self") {
    const auto psi = density_from(ctx.cfg, "psi", n, 0.5);
    results.emplace_back("self", selfduality_test(p, phi, psi, t, reps, ctx.seed));
  } else if (kind == "poisson") {
    const auto psi = density_from(ctx.cfg, "psi", n, 0.5);
    results.emplace_back("poisson", poissonization_test(p, phi, t, {psi}, reps, ctx.seed).front());
  } else {
    throw Error("config: key 'kind' must be moment, self or poisson");
  }
  auto csv_file = ctx.file(".csv");
  CsvWriter csv(csv_file, {"name", "lhs", "lhs_se", "rhs", "rhs_se", "z"});
  auto dat = ctx.file(".dat");
  auto rec = ctx.record("dualitytest " + kind);
  for (const auto& [name, r] : results) {
    csv.row({name, fmt_double(r.lhs.mean), fmt_double(r.lhs.se), fmt_double(r.rhs.mean), fmt_double(r.rhs.se),
             fmt_double(r.z)});
    dat << name << " " << fmt_double(r.lhs.mean) << " " << fmt_double(r.rhs.mean) << " " << fmt_double(r.z) << "\n";
    rec.stats.push_back({name + " lhs", r.lhs});
    rec.stats.push_back({name + " rhs", r.rhs});
    rec.verdicts.push_back({name + " |z| < 4", std::abs(r.z) < 4.0, "z " + fmt_double(r.z)});
  }
  ctx.flush(rec);
  return {rec};
}

std::vector<ResultRecord> run_renorm(Context& ctx) {
  const auto& c = ctx.cfg;
  const auto m = static_cast<std::size_t>(c.integer("m", 40));
  const auto p0 = CatalyzingFn::sample(named_function(c.str("p0", "x"), c.num("scale", 1.0)), m);
  const std::string sched_kind = c.str("schedule", "constant");
  GammaSchedule sched;
  if (sched_kind == "constant")
    sched = GammaSchedule::constant_gamma(c.num("gamma", 1.0));
  else if (sched_kind == "geometric")
    sched = GammaSchedule::geometric(c.num("gamma_star", 1.0), c.num("beta", 1.0));
  else
    throw Error("config: key 'schedule' must be constant or geometric");
  UOptions o;
  o.paths = static_cast<std::size_t>(c.integer("paths", 20000));
  o.dt = c.num("dt", 0.0);
  o.seed = ctx.seed;
  const int n = static_cast<int>(c.integer("n", 3));
  const auto its = iterate_renorm(p0, sched, n, o);
  auto csv_file = ctx.file(".csv");
  CsvWriter csv(csv_file, {"iteration", "x", "value", "se"});
  std::vector<std::vector<double>> plot;
  std::vector<ResultRecord> out;
  for (std::size_t k = 0; k < its.size(); ++k) {
    auto rec = ctx.record("renorm iterate " + std::to_string(k));
    for (std::size_t i = 0; i <= m; ++i) {
      csv.row_numbers({static_cast<double>(k), its[k].x(i), its[k].f.v[i], its[k].se[i]});
      plot.push_back({static_cast<double>(k), its[k].x(i), its[k].f.v[i]});
    }
    rec.stats.push_back({"value at 1/2", {its[k](0.5), its[k].se[m / 2], o.paths, k == 0}});
    ctx.flush(rec);
    out.push_back(std::move(rec));
  }
  auto dat = ctx.file(".dat");
  write_columns(dat, plot);
  return out;
}

std::vector<ResultRecord> run_flow(Context& ctx) {
  const auto& c = ctx.cfg;
  const auto m = static_cast<std::size_t>(c.integer("m", 40));
  const int cas = static_cast<int>(c.integer("case", 1));
  auto g = [](double x) { return x * (1 - x); };
  auto zero = [](double, double) { return 0.0; };
  DiffMatrixField w0;
  if (cas == 1)
    w0 = DiffMatrixField::sample([&](double a, double) { return 2 * g(a); }, zero,
                                 [&](double, double b) { return 0.5 * g(b); }, m);
  else if (cas == 2)
    w0 = DiffMatrixField::sample([&](double a, double) { return g(a); }, zero,
                                 [&](double a, double b) { return a * g(b); }, m);
  else if (cas == 4)
    w0 = DiffMatrixField::sample([&](double a, double) { return g(a); }, zero,
                                 [&](double a, double b) { return 4 * g(a) * g(b); }, m);
  else
    throw Error("config: key 'case' must be 1, 2 or 4");
  FlowOptions fo;
  fo.snapshots = c.list("snapshots", {});
  fo.cfl = c.num("cfl", 0.25);
  const auto r = flow_solve(w0, c.num("t_end", 15.0), fo);
  auto csv_file = ctx.file(".csv");
  CsvWriter csv(csv_file, {"t", "x", "y", "w11", "w12", "w22"});
  auto dat = ctx.file(".dat");
  std::vector<std::vector<double>> plot;
  for (std::size_t k = 0; k < r.w.size(); ++k)
    for (std::size_t i = 0; i <= m; ++i)
      for (std::size_t j = 0; j <= m; ++j) {
        const auto& w = r.w[k];
        csv.row_numbers({r.times[k], w.w11.x(i), w.w11.x(j), w.w11.at(i, j), w.w12.at(i, j), w.w22.at(i, j)});
        if (k + 1 == r.w.size()) plot.push_back({w.w11.x(i), w.w11.x(j), w.w11.at(i, j), w.w22.at(i, j)});
      }
  write_columns(dat, plot);
  auto rec = ctx.record("flow case " + std::to_string(cas));
  const double res = flow_residual(r.w.back());
  rec.stats.push_back({"residual", Estimate::exact_value(res)});
  rec.stats.push_back({"max clip", Estimate::exact_value(r.max_clip)});
  rec.verdicts.push_back({"no blow-up", !r.blew_up, ""});
  rec.verdicts.push_back({"fixed-point residual < 1e-2", res < 1e-2, "residual " + fmt_double(res)});
  ctx.flush(rec);
  return {rec};
}

std::vector<ResultRecord> run_pstar(Context& ctx) {
  const auto& c = ctx.cfg;
  const std::string cls = c.str("class", "01");
  if (cls.size() != 2 || (cls[0] != '0' && cls[0] != '1') || (cls[1] != '0' && cls[1] != '1'))
    throw Error("config: key 'class' must be one of 00, 01, 10, 11");
  ShootOptions so;
  so.m = static_cast<std::size_t>(c.integer("m", 40));
  const double alpha = c.num("alpha", 1.0);
  const auto r = pstar_shoot(alpha, cls[0] - '0', cls[1] - '0', so);
  auto csv_file = ctx.file(".csv");
  CsvWriter csv(csv_file, {"x", "p"});
  std::vector<std::vector<double>> plot;
  for (std::size_t i = 0; i <= r.p.m(); ++i) {
    csv.row_numbers({r.p.x(i), r.p.f.v[i]});
    plot.push_back({r.p.x(i), r.p.f.v[i]});
  }
  auto dat = ctx.file(".dat");
  write_columns(dat, plot);
  auto rec = ctx.record("pstar alpha=" + fmt_double(alpha) + " class=" + cls);
  rec.stats.push_back({"slope", Estimate::exact_value(r.slope)});
  rec.stats.push_back({"residual", Estimate::exact_value(r.residual)});
  rec.verdicts.push_back({"ODE residual < 1e-6", r.residual < 1e-6, "residual " + fmt_double(r.residual)});
  rec.verdicts.push_back({"boundary identities within 1e-3", std::max(r.boundary_left, r.boundary_right) < 1e-3,
                          fmt_double(r.boundary_left) + ", " + fmt_double(r.boundary_right)});
  ctx.flush(rec);
  return {rec};
}

std::vector<ResultRecord> run_cauchy(Context& ctx) {
  const auto& c = ctx.cfg;
  const auto m = static_cast<std::size_t>(c.integer("m", 40));
  const auto f = GridFn1D::sample(named_function(c.str("f", "x"), c.num("scale", 1.0)), m);
  CauchyOptions co;
  co.snapshots = c.list("snapshots", {});
  const auto r = cauchy_solve(f, c.num("alpha", 1.0), c.num("t_end", 40.0), co);
  auto csv_file = ctx.file(".csv");
  CsvWriter csv(csv_file, {"t", "x", "u"});
  std::vector<std::vector<double>> plot;
  for (std::size_t k = 0; k < r.u.size(); ++k)
    for (std::size_t i = 0; i <= m; ++i) {
      csv.row_numbers({r.times[k], r.u[k].x(i), r.u[k].v[i]});
      plot.push_back({r.times[k], r.u[k].x(i), r.u[k].v[i]});
    }
  auto dat = ctx.file(".dat");
  write_columns(dat, plot);
  auto rec = ctx.record("cauchy");
  rec.stats.push_back({"u(1/2) at t_end", Estimate::exact_value(r.u.back()(0.5))});
  ctx.flush(rec);
  return {rec};
}

}  // namespace

std::vector<std::string> subcommands() {
  return {"verify", "contact", "braco", "resem", "dualitytest", "renorm", "flow", "pstar", "cauchy"};
}

std::set<std::string> subcommand_keys(const std::string& sub) {
  if (sub == "verify") return {"seed"};
  if (sub == "contact") return with(kCommon, {kLattice, {"delta", "t_grid", "init"}});
  if (sub == "braco") return with(kCommon, {kLattice, {"b", "c", "d", "x0", "t_grid", "guard"}});
  if (sub == "resem") return with(kCommon, {kLattice, {"b", "c", "d", "phi0", "t_grid", "dt"}});
  if (sub == "dualitytest")
    return with(kCommon, {kLattice, {"b", "c", "d", "dt", "guard", "kind", "x", "phi", "psi", "t", "oracle_cap"}});
  if (sub == "renorm")
    return {"seed", "paths", "dt", "p0", "scale", "schedule", "gamma", "gamma_star", "beta", "n", "m"};
  if (sub == "flow") return {"case", "t_end", "m", "snapshots", "cfl"};
  if (sub == "pstar") return {"alpha", "class", "m"};
  if (sub == "cauchy") return {"f", "scale", "alpha", "t_end", "m", "snapshots"};
  throw Error("unknown subcommand '" + sub + "'");
}

std::vector<ResultRecord> run(const std::string& sub, const Config& c, const RunOptions& opt) {
  Context ctx(sub, c, opt);
  if (sub == "verify") return run_verify(ctx);
  if (sub == "contact") return run_contact(ctx);
  if (sub == "braco") return run_braco(ctx);
  if (sub == "resem") return run_resem(ctx);
  if (sub == "dualitytest") return run_dualitytest(ctx);
  if (sub == "renorm") return run_renorm(ctx);
  if (sub == "flow") return run_flow(ctx);
  if (sub == "pstar") return run_pstar(ctx);
  if (sub == "cauchy") return run_cauchy(ctx);
  throw Error("unknown subcommand '" + sub + "'");
}

}  // namespace ipslab
