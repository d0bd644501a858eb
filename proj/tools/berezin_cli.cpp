// Command-line front end: computations, sweeps, and comparisons over the
// built-in models and the projective-line oracle, reported as JSON or CSV.
//
// Exit codes: 0 success, 2 usage error, 3 precondition or input failure.


#include <chrono>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "berezin/contravariant.hpp"
#include "berezin/oracle.hpp"
#include "berezin/symbols.hpp"

using namespace berezin;
using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// parsing helpers

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (pos <= s.size()) {
    size_t end = s.find(sep, pos);
    if (end == std::string::npos) end = s.size();
    out.push_back(s.substr(pos, end - pos));
    pos = end + 1;
  }
  return out;
}

BasePoint parse_base(const KahlerModel& model, const std::string& text) {
  auto parts = split(text, ',');
  if (static_cast<int>(parts.size()) != 2 * model.n)
    throw UsageError("--base needs " + std::to_string(2 * model.n) +
                     " comma-separated rationals for this model");
  BasePoint p;
  for (int i = 0; i < model.n; ++i) p.x.push_back(RatC(parse_rational(parts[i])));
  for (int i = 0; i < model.n; ++i)
    p.y.push_back(RatC(parse_rational(parts[model.n + i])));
  return p;
}

std::vector<int> parse_klist(const std::string& text) {
  std::vector<int> ks;
  for (auto& piece : split(text, ',')) {
    auto dots = piece.find("..");
    if (dots == std::string::npos) {
      ks.push_back(std::stoi(piece));
      continue;
    }
    int lo = std::stoi(piece.substr(0, dots));
    std::string rest = piece.substr(dots + 2);
    int step = 4;
    auto colon = rest.find(':');
    if (colon != std::string::npos) {
      step = std::stoi(rest.substr(colon + 1));
      rest = rest.substr(0, colon);
    }
    int hi = std::stoi(rest);
    if (step <= 0 || hi < lo) throw UsageError("bad k range '" + piece + "'");
    for (int k = lo; k <= hi; k += step) ks.push_back(k);
  }
  if (ks.empty()) throw UsageError("empty k list");
  return ks;
}

/// Polynomial jets in the chart variables: sums of terms like
/// "2/3*x^2*y", "-x", "1/2". Prefix coefficients separated by ';'.
RatJet parse_poly(const KahlerModel& model, const std::string& text, int cap) {
  auto L = layout_xy(model.n);
  RatJet j(L, cap);
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  if (s.empty()) throw UsageError("empty polynomial");
  size_t pos = 0;
  while (pos < s.size()) {
    int sign = 1;
    while (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
      if (s[pos] == '-') sign = -sign;
      ++pos;
    }
    size_t end = pos;
    while (end < s.size() && s[end] != '+' && s[end] != '-') ++end;
    std::string term = s.substr(pos, end - pos);
    pos = end;
    if (term.empty()) throw UsageError("malformed polynomial '" + text + "'");

    Rat coeff = rat(sign);
    MultiIndex mi(L.vars(), 0);
    for (auto& factor : split(term, '*')) {
      if (factor.empty()) throw UsageError("malformed polynomial '" + text + "'");
      if (factor[0] == 'x' || factor[0] == 'y') {
        Group g = factor[0] == 'x' ? Group::X : Group::Y;
        size_t caret = factor.find('^');
        std::string varidx = factor.substr(1, caret == std::string::npos
                                                  ? std::string::npos
                                                  : caret - 1);
        int vi = varidx.empty() ? 0 : std::stoi(varidx) - 1;
        int e = caret == std::string::npos ? 1 : std::stoi(factor.substr(caret + 1));
        if (vi < 0 || vi >= model.n)
          throw UsageError("variable index out of range in '" + factor + "'");
        mi[static_cast<size_t>(L.var(g, vi))] =
            static_cast<uint16_t>(mi[static_cast<size_t>(L.var(g, vi))] + e);
      } else {
        coeff *= parse_rational(factor);
      }
    }
    if (order_of(mi) > cap)
      throw UsageError("polynomial degree exceeds the jet cap");
    j.add_coeff(mi, RatC(coeff));
  }
  return j;
}

SymbolPrefix<RatC> parse_prefix(const KahlerModel& model, const std::string& text,
                                int cap) {
  SymbolPrefix<RatC> F;
  for (auto& piece : split(text, ';')) F.coeff.push_back(parse_poly(model, piece, cap));
  return F;
}

// ---------------------------------------------------------------------------
// reporting

std::string fmt_double(double v) {
  std::ostringstream s;
  s.precision(12);
  s << v;
  return s.str();
}

struct Report {
  ordered_json j;
  std::vector<std::string> csv_header;
  std::vector<std::vector<std::string>> csv_rows;

  void set_csv(std::vector<std::string> header) { csv_header = std::move(header); }
  void row(std::vector<std::string> r) { csv_rows.push_back(std::move(r)); }

  std::string render(const std::string& format) const {
    if (format == "json") return j.dump(2) + "\n";
    if (format != "csv") throw UsageError("unknown format '" + format + "'");
    std::ostringstream out;
    for (size_t i = 0; i < csv_header.size(); ++i)
      out << (i ? "," : "") << csv_header[i];
    out << "\n";
    for (auto& r : csv_rows) {
      for (size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
      out << "\n";
    }
    return out.str();
  }
};

// ---------------------------------------------------------------------------
// commands

struct Invocation {
  std::string command;
  std::map<std::string, std::string> opts;

  const std::string& need(const std::string& key) const {
    auto it = opts.find(key);
    if (it == opts.end()) throw UsageError("missing --" + key);
    return it->second;
  }
  std::string get(const std::string& key, const std::string& fallback = "") const {
    auto it = opts.find(key);
    return it == opts.end() ? fallback : it->second;
  }
  bool flag(const std::string& key) const { return opts.count(key) > 0; }
};

Report run_models(const Invocation&) {
  Report rep;
  rep.j["models"] = ordered_json::array();
  rep.j["models"].push_back(
      {{"name", "flat:n"},
       {"potential", "sum x_i y_i"},
       {"admissible", "every point"}});
  rep.j["models"].push_back(
      {{"name", "fs:m"},
       {"potential", "log(1 + x y), auxiliary degree m"},
       {"admissible", "1 + x y != 0"}});
  rep.j["models"].push_back(
      {{"name", "pflat:p/q"},
       {"potential", "x y + (p/q) (x y)^2 / 2"},
       {"admissible", "|p/q| |x y| < 1/2"}});
  rep.set_csv({"name", "admissible"});
  rep.row({"flat:n", "always"});
  rep.row({"fs:m", "1+x*y nonzero"});
  rep.row({"pflat:p/q", "|lambda||x*y|<1/2"});
  return rep;
}

template <class K>
Report run_rho(const Invocation& inv) {
  auto model = KahlerModel::parse(inv.need("model"));
  auto base = parse_base(model, inv.need("base"));
  int cap = std::stoi(inv.need("cap"));
  int order = std::stoi(inv.get("order", "0"));
  auto sym = bergman_symbol<K>(model, base, cap, order);
  Report rep;
  rep.j["coefficients"] = ordered_json::array();
  rep.set_csv({"level", "value"});
  int level = 0;
  for (auto& v : sym.values()) {
    rep.j["coefficients"].push_back(to_string(v));
    rep.row({std::to_string(level++), to_string(v)});
  }
  return rep;
}

template <class K>
Report run_star(const Invocation& inv) {
  auto model = KahlerModel::parse(inv.need("model"));
  auto base = parse_base(model, inv.need("base"));
  int cap = std::stoi(inv.need("cap"));
  int in_order = std::stoi(inv.get("order", std::to_string(4 * cap)));
  auto F = parse_prefix(model, inv.need("f"), in_order);
  auto G = parse_prefix(model, inv.need("g"), in_order);
  SymbolPrefix<K> Fk, Gk;
  for (auto& c : F.coeff) Fk.coeff.push_back(convert_jet<K>(c));
  for (auto& c : G.coeff) Gk.coeff.push_back(convert_jet<K>(c));
  auto H = star_product(model, base, Fk, Gk, cap);
  Report rep;
  rep.j["coefficients"] = ordered_json::array();
  rep.set_csv({"level", "value", "jet_order"});
  for (int c = 0; c <= cap; ++c) {
    rep.j["coefficients"].push_back(
        {{"value", to_string(H.coeff[c].constant_term())},
         {"jet_order", H.coeff[c].cap()}});
    rep.row({std::to_string(c), to_string(H.coeff[c].constant_term()),
             std::to_string(H.coeff[c].cap())});
  }
  return rep;
}

template <class K>
Report run_acoeff(const Invocation& inv) {
  auto model = KahlerModel::parse(inv.need("model"));
  auto base = parse_base(model, inv.need("base"));
  Report rep;
  rep.set_csv({"level", "alpha", "beta", "value"});
  if (inv.opts.count("ell")) {
    int level = std::stoi(inv.need("ell"));
    MultiIndex alpha, beta;
    for (auto& t : split(inv.need("alpha"), ','))
      alpha.push_back(static_cast<uint16_t>(std::stoi(t)));
    for (auto& t : split(inv.need("beta"), ','))
      beta.push_back(static_cast<uint16_t>(std::stoi(t)));
    K v = bidiff_coefficient<K>(model, base, level, alpha, beta);
    rep.j["value"] = to_string(v);
    rep.row({std::to_string(level), inv.need("alpha"), inv.need("beta"),
             to_string(v)});
    return rep;
  }
  int max_level = std::stoi(inv.need("max-level"));
  auto table = build_coefficient_table<K>(model, base, max_level);
  rep.j["entries"] = ordered_json::array();
  for (auto& [key, v] : table.entries) {
    auto& [l, a, b] = key;
    std::string as, bs;
    for (auto e : a) as += (as.empty() ? "" : ",") + std::to_string(e);
    for (auto e : b) bs += (bs.empty() ? "" : ",") + std::to_string(e);
    rep.j["entries"].push_back(
        {{"level", l}, {"alpha", as}, {"beta", bs}, {"value", to_string(v)}});
    rep.row({std::to_string(l), as, bs, to_string(v)});
  }
  return rep;
}

template <class K>
Report run_bmap(const Invocation& inv, bool inverse) {
  auto model = KahlerModel::parse(inv.need("model"));
  auto base = parse_base(model, inv.need("base"));
  int cap = std::stoi(inv.need("cap"));
  int in_order = std::stoi(inv.get("order", std::to_string(4 * cap)));
  auto F = parse_prefix(model, inv.need("f"), in_order);
  SymbolPrefix<K> Fk;
  for (auto& c : F.coeff) Fk.coeff.push_back(convert_jet<K>(c));
  auto G = inverse ? from_covariant(model, base, Fk, cap)
                   : to_covariant(model, base, Fk, cap);
  Report rep;
  rep.j["coefficients"] = ordered_json::array();
  rep.set_csv({"level", "value"});
  for (int c = 0; c <= cap; ++c) {
    rep.j["coefficients"].push_back(to_string(G.coeff[c].constant_term()));
    rep.row({std::to_string(c), to_string(G.coeff[c].constant_term())});
  }
  return rep;
}

template <class K>
Report run_growth(const Invocation& inv) {
  auto model = KahlerModel::parse(inv.need("model"));
  int max_level = std::stoi(inv.need("max-level"));
  std::vector<BasePoint> bases;
  for (auto& piece : split(inv.need("bases"), ';'))
    bases.push_back(parse_base(model, piece));
  auto scan = fit_coefficient_growth<K>(model, bases, max_level);
  Report rep;
  rep.j["c_fit"] = scan.c_fit;
  rep.j["per_level_max"] = scan.per_level_max;
  rep.j["per_level_c"] = scan.per_level_c;
  rep.set_csv({"level", "max_abs", "c"});
  for (size_t l = 0; l < scan.per_level_max.size(); ++l)
    rep.row({std::to_string(l), fmt_double(scan.per_level_max[l]),
             fmt_double(scan.per_level_c[l])});
  return rep;
}

Report run_oracle_product(const Invocation& inv) {
  auto f = OracleSymbol::parse(inv.need("f"));
  auto g = OracleSymbol::parse(inv.need("g"));
  auto ks = parse_klist(inv.need("k"));
  int aux = std::stoi(inv.get("aux", "0"));
  int budget = std::stoi(inv.get("budget", "12"));
  ProductPolicy policy = inv.opts.count("N")
                             ? ProductPolicy::fixed(std::stoi(inv.need("N")))
                             : ProductPolicy::truncated(
                                   inv.opts.count("eps")
                                       ? std::optional<Rat>(
                                             parse_rational(inv.need("eps")))
                                       : std::nullopt);
  auto cmp = compare_product(f, g, policy, ks, aux, budget);

  Report rep;
  rep.set_csv({"k", "N", "residual", "slope_so_far"});
  rep.j["rows"] = ordered_json::array();
  std::vector<std::pair<double, double>> pts;
  for (auto& row : cmp.rows) {
    std::string slope_so_far;
    if (row.residual_norm > 0) {
      pts.emplace_back(std::log(static_cast<double>(row.k)),
                       std::log(row.residual_norm));
      if (pts.size() >= 2) slope_so_far = fmt_double(fit_line(pts).slope);
    }
    rep.j["rows"].push_back({{"k", row.k},
                             {"N", row.n_used},
                             {"residual", row.residual_norm},
                             {"max_entry", row.residual_max},
                             {"floor_limited", row.floor_limited},
                             {"prefix_limited", row.prefix_limited},
                             {"tail_bound", row.tail_bound}});
    rep.row({std::to_string(row.k), std::to_string(row.n_used),
             fmt_double(row.residual_norm), slope_so_far});
  }
  if (policy.kind == ProductPolicy::Kind::FixedOrder) {
    rep.j["loglog_slope"] = cmp.loglog.slope;
    rep.j["loglog_r2"] = cmp.loglog.r2;
  } else {
    rep.j["eps"] = to_string(cmp.eps);
    rep.j["c_fit"] = cmp.c_fit;
    rep.j["rate"] = cmp.exponential.rate;
    rep.j["r2"] = cmp.exponential.r2;
    rep.j["floored"] = cmp.exponential.floored;
    rep.j["all_floored"] = cmp.exponential.all_floored;
  }
  return rep;
}

Report run_oracle_covariant(const Invocation& inv) {
  auto f = OracleSymbol::parse(inv.need("f"));
  int cap = std::stoi(inv.need("cap"));
  auto ks = parse_klist(inv.need("k"));
  int aux = std::stoi(inv.get("aux", "0"));
  Rat z = parse_rational(inv.get("z", "0"));
  auto r = covariant_by_extrapolation(f, cap, ks, aux, z);
  Report rep;
  rep.j["estimates"] = ordered_json::array();
  rep.j["errors"] = ordered_json::array();
  rep.set_csv({"level", "estimate", "error"});
  for (int l = 0; l <= cap; ++l) {
    rep.j["estimates"].push_back(to_string(r.estimates[l]));
    rep.j["errors"].push_back(r.errors[l]);
    rep.row({std::to_string(l), to_string(r.estimates[l]), fmt_double(r.errors[l])});
  }
  rep.j["condition"] = r.condition;
  return rep;
}

Report run_oracle_bergman(const Invocation& inv) {
  int k = std::stoi(inv.need("k"));
  int aux = std::stoi(inv.get("aux", "0"));
  Report rep;
  rep.set_csv({"quantity", "value"});
  if (inv.opts.count("z") && inv.opts.count("w")) {
    Rat z = parse_rational(inv.need("z")), w = parse_rational(inv.need("w"));
    double v = bergman_kernel_value(
        k, aux, {to_double(z), 0.0}, {to_double(w), 0.0});
    rep.j["kernel_magnitude"] = v;
    rep.row({"kernel_magnitude", fmt_double(v)});
    return rep;
  }
  // diagonal: compare the exact kernel with the model partial sum
  auto model = KahlerModel::parse("fs:" + std::to_string(aux));
  BasePoint o;
  o.x = {RatC(Rat(0))};
  o.y = {RatC(Rat(0))};
  Rat eps = parse_rational(inv.get("eps", "1/2"));
  auto s = bergman_partial_sum<RatC>(model, o, eps, k);
  double kernel = bergman_kernel_value(k, aux, {0, 0}, {0, 0});
  rep.j["partial_sum_scaled_by_2pi"] = to_string(s.scaled);
  rep.j["partial_sum"] = s.value;
  rep.j["kernel_diagonal"] = kernel;
  rep.j["terms"] = s.terms;
  rep.row({"partial_sum_scaled_by_2pi", to_string(s.scaled)});
  rep.row({"partial_sum", fmt_double(s.value)});
  rep.row({"kernel_diagonal", fmt_double(kernel)});
  return rep;
}

Report run_oracle_offdiag(const Invocation& inv) {
  Rat z = parse_rational(inv.need("z")), w = parse_rational(inv.need("w"));
  int aux = std::stoi(inv.get("aux", "0"));
  auto ks = parse_klist(inv.need("k"));
  auto r = offdiagonal_decay_rate(RatC(z), RatC(w), aux, ks);
  Report rep;
  rep.j["rate"] = r.fit.rate;
  rep.j["r2"] = r.fit.r2;
  rep.j["reference"] = r.reference;
  rep.j["samples"] = ordered_json::array();
  rep.set_csv({"k", "normalized_magnitude"});
  for (auto& [k, v] : r.samples) {
    rep.j["samples"].push_back({{"k", k}, {"value", v}});
    rep.row({std::to_string(k), fmt_double(v)});
  }
  return rep;
}

Report run_seminorm(const Invocation& inv) {
  double t = to_double(parse_rational(inv.need("t")));
  double s = to_double(parse_rational(inv.need("s")));
  int cap = std::stoi(inv.get("deg-cap", "4"));
  std::string opname = inv.need("op");
  auto L = layout_uv(1);

  JetOperator<RatC> op;
  std::optional<MultiIndex> gamma;
  if (opname == "id") {
    op = {"identity", [](const RatJet& f) { return f; }};
  } else if (opname == "du") {
    op = {"du", [](const RatJet& f) { return derive(f, Group::U); }};
    gamma = MultiIndex{1, 0};
  } else if (opname == "dv") {
    op = {"dv", [](const RatJet& f) { return derive(f, Group::V); }};
    gamma = MultiIndex{0, 1};
  } else if (opname.rfind("d:", 0) == 0) {
    auto parts = split(opname.substr(2), ',');
    if (parts.size() != 2) throw UsageError("derivative spec is d:a,b");
    int a = std::stoi(parts[0]), b = std::stoi(parts[1]);
    gamma = MultiIndex{static_cast<uint16_t>(a), static_cast<uint16_t>(b)};
    op = {opname, [a, b](const RatJet& f) {
            RatJet g = f;
            for (int i = 0; i < a; ++i) g = derive(g, Group::U);
            for (int i = 0; i < b; ++i) g = derive(g, Group::V);
            return g;
          }};
  } else {
    throw UsageError("unknown operator '" + opname + "'");
  }

  auto est = seminorm_lower_bound(op, L, t, s, cap);
  Report rep;
  rep.j["operator"] = est.op;
  rep.j["lower_bound"] = est.lower;
  rep.j["attained_by"] = est.attained_by;
  rep.set_csv({"quantity", "value"});
  rep.row({"lower_bound", fmt_double(est.lower)});
  if (gamma) {
    double upper = cauchy_derivative_bound(*gamma, t, s);
    rep.j["cauchy_upper_bound"] = upper;
    rep.row({"cauchy_upper_bound", fmt_double(upper)});
  }
  return rep;
}

Report dispatch(const Invocation& inv);

Report run_sweep(const Invocation& inv) {
  fs::path config = inv.need("config");
  std::ifstream in(config);
  if (!in) throw DomainError("cannot read config file '" + config.string() + "'");

  std::vector<Invocation> jobs;
  Invocation current;
  int lineno = 0;
  std::string line;
  auto flush = [&] {
    if (!current.command.empty()) jobs.push_back(current);
    current = Invocation{};
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = line;
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
      s.pop_back();
    if (s.empty()) {
      flush();
      continue;
    }
    auto eq = s.find('=');
    if (eq == std::string::npos)
      throw DomainError("malformed config line " + std::to_string(lineno) +
                        ": '" + s + "'");
    std::string key = s.substr(0, eq), value = s.substr(eq + 1);
    if (key == "command")
      current.command = value;
    else
      current.opts[key] = value;
  }
  flush();
  if (jobs.empty()) throw DomainError("config declared no jobs");

  int max_jobs = std::stoi(inv.get("jobs", "1"));
  if (max_jobs < 1) max_jobs = 1;
  fs::path outdir = config.parent_path();
  if (inv.opts.count("outdir")) outdir = inv.need("outdir");

  struct JobResult {
    std::string out;
    std::string rendered;
  };
  std::vector<JobResult> results(jobs.size());
  std::vector<std::future<void>> inflight;
  size_t next = 0;
  auto launch = [&](size_t idx) {
    inflight.push_back(std::async(std::launch::async, [&, idx] {
      const Invocation& job = jobs[idx];
      Report rep = dispatch(job);
      std::string format = job.get("format", "json");
      ordered_json echo;
      echo["command"] = job.command;
      for (auto& [k, v] : job.opts) echo[k] = v;
      rep.j["invocation"] = echo;
      results[idx].out = job.get("out", job.command + "_" + std::to_string(idx) +
                                            "." + format);
      results[idx].rendered = rep.render(format);
    }));
  };
  while (next < jobs.size() || !inflight.empty()) {
    while (next < jobs.size() && static_cast<int>(inflight.size()) < max_jobs)
      launch(next++);
    inflight.front().get();
    inflight.erase(inflight.begin());
  }

  Report rep;
  rep.j["jobs"] = ordered_json::array();
  rep.set_csv({"job", "output"});
  for (size_t i = 0; i < results.size(); ++i) {
    fs::path target = outdir / results[i].out;
    fs::path tmp = target;
    tmp += ".tmp";
    {
      std::ofstream out(tmp);
      if (!out) throw DomainError("cannot write '" + target.string() + "'");
      out << results[i].rendered;
    }
    fs::rename(tmp, target);
    rep.j["jobs"].push_back({{"index", i}, {"output", target.string()}});
    rep.row({std::to_string(i), target.string()});
  }
  return rep;
}

Report dispatch(const Invocation& inv) {
  bool use_float = inv.flag("float");
  if (use_float) ensure_float_init();

  auto pick = [&](auto exact_fn, auto float_fn) {
    return use_float ? float_fn() : exact_fn();
  };

  if (inv.command == "models") return run_models(inv);
  if (inv.command == "rho")
    return pick([&] { return run_rho<RatC>(inv); },
                [&] { return run_rho<FloatC>(inv); });
  if (inv.command == "star")
    return pick([&] { return run_star<RatC>(inv); },
                [&] { return run_star<FloatC>(inv); });
  if (inv.command == "acoeff")
    return pick([&] { return run_acoeff<RatC>(inv); },
                [&] { return run_acoeff<FloatC>(inv); });
  if (inv.command == "bmap")
    return pick([&] { return run_bmap<RatC>(inv, false); },
                [&] { return run_bmap<FloatC>(inv, false); });
  if (inv.command == "binv")
    return pick([&] { return run_bmap<RatC>(inv, true); },
                [&] { return run_bmap<FloatC>(inv, true); });
  if (inv.command == "growth")
    return pick([&] { return run_growth<RatC>(inv); },
                [&] { return run_growth<FloatC>(inv); });
  if (inv.command == "oracle-product") return run_oracle_product(inv);
  if (inv.command == "oracle-covariant") return run_oracle_covariant(inv);
  if (inv.command == "oracle-bergman") return run_oracle_bergman(inv);
  if (inv.command == "oracle-offdiag") return run_oracle_offdiag(inv);
  if (inv.command == "seminorm") return run_seminorm(inv);
  if (inv.command == "sweep") return run_sweep(inv);
  throw UsageError("unknown command '" + inv.command + "'");
}

const char* kUsage =
    "usage: berezin <command> [--key value ...] [--float] [--out path] [--format json|csv]\n"
    "commands: models rho star acoeff bmap binv growth oracle-product\n"
    "          oracle-covariant oracle-bergman oracle-offdiag seminorm sweep\n"
    "Rational literals (p/q) are accepted wherever a coordinate, coefficient\n"
    "or eps appears; pass --float to compute in high-precision floats\n"
    "(BEREZIN_PRECISION digits, default 30).\n";

}  // namespace

int main(int argc, char** argv) {
  try {
    if (argc < 2) {
      std::cerr << kUsage;
      return 2;
    }
    Invocation inv;
    inv.command = argv[1];
    if (inv.command == "--help" || inv.command == "-h") {
      std::cout << kUsage;
      return 0;
    }
    for (int i = 2; i < argc; ++i) {
      std::string arg = argv[i];
      if (arg.rfind("--", 0) != 0) throw UsageError("unexpected argument '" + arg + "'");
      std::string key = arg.substr(2);
      if (key.empty()) throw UsageError("empty option name");
      if (key == "float") {
        inv.opts["float"] = "1";
        continue;
      }
      if (i + 1 >= argc) throw UsageError("missing value for --" + key);
      inv.opts[key] = argv[++i];
    }

    auto t0 = std::chrono::steady_clock::now();
    Report rep = dispatch(inv);
    auto t1 = std::chrono::steady_clock::now();

    ordered_json echo;
    echo["command"] = inv.command;
    for (auto& [k, v] : inv.opts) echo[k] = v;
    ordered_json record;
    record["invocation"] = echo;
    record["arith"] = inv.flag("float") ? "float" : "exact";
    for (auto& [k, v] : rep.j.items()) record[k] = v;
    record["timing_ms"] =
        std::chrono::duration<double, std::milli>(t1 - t0).count();
    rep.j = record;

    std::string format = inv.get("format", "json");
    std::string rendered = rep.render(format);
    if (inv.opts.count("out")) {
      fs::path target = inv.need("out");
      fs::path tmp = target;
      tmp += ".tmp";
      {
        std::ofstream out(tmp);
        if (!out) throw DomainError("cannot write '" + target.string() + "'");
        out << rendered;
      }
      fs::rename(tmp, target);
    } else {
      std::cout << rendered;
    }
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n" << kUsage;
    return 2;
  } catch (const Error& e) {
    std::cerr << "precondition failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
