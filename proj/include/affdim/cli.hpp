#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "dimension.hpp"
#include "errors.hpp"
#include "gallery.hpp"
#include "io.hpp"
#include "parallel.hpp"
#include "pressure.hpp"
#include "spectrum.hpp"
#include "subset.hpp"

namespace affdim {

enum class Command { Pressure, Dim, Spectrum, Verify, Demo };

struct RunConfig {
  Command command = Command::Dim;
  std::string demo;  // non-compact | isolated
  std::string gallery;
  std::map<std::string, std::string> params;
  std::string system_path;
  std::string subset_expr;
  std::optional<double> s;
  double tolerance = 1e-3;
  double budget = 1e7;
  std::optional<Index> nmax;
  std::string out;
  std::string format = "json";
  unsigned threads = 0;
};

/// Exit codes: 0 all certified checks passed, 1 a check failed, 2 bad configuration, 3 computation error.
enum ExitCode { kExitOk = 0, kExitCheckFailed = 1, kExitConfig = 2, kExitError = 3 };

namespace detail {

inline std::map<std::string, std::string> parse_params(const std::string& text) {
  std::map<std::string, std::string> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    const std::string item = text.substr(pos, comma - pos);
    const std::size_t eq = item.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == item.size())
      throw Error(ErrorCode::ConfigParse, "parameter '" + item + "' is not key=value");
    out[item.substr(0, eq)] = item.substr(eq + 1);
    pos = comma + 1;
  }
  return out;
}

inline double param_number(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != value.size() || !std::isfinite(v)) throw Error(ErrorCode::ConfigParse, "parameter " + key + " needs a number, got '" + value + "'");
  return v;
}

inline void build_app(CLI::App& app, RunConfig& c, std::string& params_text) {
  app.require_subcommand(1);
  app.add_option("--gallery", c.gallery, "paper51 | isolated52 | selfsimilar")->check(CLI::IsMember({"paper51", "isolated52", "selfsimilar"}));
  app.add_option("--params", params_text, "gallery parameters k=v,...");
  app.add_option("--system", c.system_path, "system description file (JSON)");
  app.add_option("--subset", c.subset_expr, "subset expression, e.g. 1,2+tail(5)");
  app.add_option("--s", c.s, "exponent s");
  app.add_option("--tol", c.tolerance, "dimension tolerance");
  app.add_option("--budget", c.budget, "word budget");
  app.add_option("--nmax", c.nmax, "largest enumerated index / truncation index");
  app.add_option("--out", c.out, "output file");
  app.add_option("--format", c.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--threads", c.threads, "worker threads (default: AFFDIM_THREADS or all cores)");
  app.add_subcommand("pressure", "pressure enclosure at one s")->fallthrough()->callback([&c] { c.command = Command::Pressure; });
  app.add_subcommand("dim", "affinity dimension interval")->fallthrough()->callback([&c] { c.command = Command::Dim; });
  app.add_subcommand("spectrum", "dimension spectrum over enumerated subsets")->fallthrough()->callback([&c] {
    c.command = Command::Spectrum;
  });
  app.add_subcommand("verify", "verification battery for a gallery")->fallthrough()->callback([&c] { c.command = Command::Verify; });
  auto* demo = app.add_subcommand("demo", "non-compact | isolated reproduction")->fallthrough();
  demo->add_option("name", c.demo)->required()->check(CLI::IsMember({"non-compact", "isolated"}));
  demo->callback([&c] { c.command = Command::Demo; });
}

}  // namespace detail

inline void validate(const RunConfig& c) {
  if (!(c.budget >= 1e3)) throw Error(ErrorCode::ConfigParse, "--budget must be at least 1e3");
  if (!(c.tolerance > 0.0 && c.tolerance < 0.5)) throw Error(ErrorCode::ConfigParse, "--tol must lie in (0, 0.5)");
  if (!c.gallery.empty() && !c.system_path.empty()) throw Error(ErrorCode::ConfigParse, "give --gallery or --system, not both");
  if (c.command == Command::Pressure && !c.s) throw Error(ErrorCode::ConfigParse, "pressure needs --s");
  if (c.s && !(*c.s >= 0.0)) throw Error(ErrorCode::ConfigParse, "--s must be non-negative");
  if (!c.subset_expr.empty()) {
    try {
      (void)parse_subset(c.subset_expr);
    } catch (const SyntaxError& e) {
      throw Error(ErrorCode::ConfigParse, std::string("--subset: ") + e.what());
    }
  }
}

/// Parses argv-style arguments (without the program name); help requests throw CLI::CallForHelp.
inline RunConfig parse_args(const std::vector<std::string>& args) {
  RunConfig c;
  c.threads = default_threads();
  std::string params_text;
  CLI::App app{"affdim"};
  detail::build_app(app, c, params_text);
  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    throw;
  } catch (const CLI::ParseError& e) {
    throw Error(ErrorCode::ConfigParse, e.what());
  }
  c.params = detail::parse_params(params_text);
  if (c.threads == 0) c.threads = default_threads();
  validate(c);
  return c;
}

/// Builds the system named by the configuration (paper51 by default).
inline IfsSystem make_system(const RunConfig& c) {
  if (!c.system_path.empty()) {
    if (!c.params.empty()) throw Error(ErrorCode::ConfigParse, "--params applies to galleries only");
    return load_system(c.system_path);
  }
  const std::string g = c.gallery.empty() ? "paper51" : c.gallery;
  auto unknown = [&](const std::string& k) { return Error(ErrorCode::ConfigParse, "unknown parameter '" + k + "' for " + g); };
  if (g == "paper51") {
    Paper51Params p;
    for (const auto& [k, v] : c.params) {
      const double x = detail::param_number(k, v);
      if (k == "beta") p.beta = x;
      else if (k == "gamma") p.gamma = x;
      else if (k == "b") p.b = x;
      else if (k == "d") p.d = x;
      else if (k == "c") p.c = x;
      else if (k == "eta") p.eta = x;
      else throw unknown(k);
    }
    return build_paper_family_51(p);
  }
  if (g == "isolated52") {
    IsolatedParams p;
    for (const auto& [k, v] : c.params) {
      if (k == "law") {
        if (v != "geometric" && v != "power") throw Error(ErrorCode::ConfigParse, "law must be geometric or power");
        p.law = v == "geometric" ? TailLaw::Geometric : TailLaw::Power;
      } else if (k == "a0") {
        p.a0 = detail::param_number(k, v);
      } else if (k == "rate") {
        p.rate = detail::param_number(k, v);
      } else {
        throw unknown(k);
      }
    }
    return build_isolated_point_family(p);
  }
  // selfsimilar: r1, r2, ... plus an optional geometric tail tail_a0, tail_q
  std::map<Index, double> ratios;
  std::optional<DiagonalTail> tail;
  for (const auto& [k, v] : c.params) {
    const double x = detail::param_number(k, v);
    if (k.size() > 1 && k[0] == 'r' && k.find_first_not_of("0123456789", 1) == std::string::npos) {
      ratios[static_cast<Index>(std::stoul(k.substr(1)))] = x;
    } else if (k == "tail_a0" || k == "tail_q") {
      if (!tail) tail = DiagonalTail{TailLaw::Geometric, 0.25, 0.25, std::nullopt, 0.0, 1};
      (k == "tail_a0" ? tail->a0 : tail->rate) = x;
    } else {
      throw unknown(k);
    }
  }
  std::vector<double> rs;
  Index expect = 1;
  for (const auto& [i, r] : ratios) {
    if (i != expect++) throw Error(ErrorCode::ConfigParse, "ratios must be r1, r2, ... without gaps");
    rs.push_back(r);
  }
  if (rs.empty() && !tail) rs = {0.5, 0.25};
  return build_self_similar(rs, tail);
}

namespace detail {

inline SubsetSpec default_subset(const IfsSystem& s) {
  const std::string& g = s.gallery().name;
  if (g == "paper51") return SubsetSpec::finite({1, 2, 3});
  if (g == "isolated52") return SubsetSpec::finite({1, 2});
  std::vector<Index> idx;
  for (const auto& m : s.explicit_maps()) idx.push_back(m.index);
  if (s.tail()) return SubsetSpec::cofinite(idx, s.tail()->start_index());
  return SubsetSpec::finite(idx);
}

inline std::string yes(bool b) { return b ? "PASS" : "FAIL"; }

struct Row {
  std::string name;
  bool pass;
  bool counted;  // advisory rows never change the exit status
  double margin;
  std::string detail;
};

inline void print_rows(std::ostream& os, const std::vector<Row>& rows) {
  for (const auto& r : rows)
    os << (r.counted ? yes(r.pass) : (r.pass ? "ADVISORY-PASS" : "ADVISORY-FAIL")) << "  " << r.name << "  margin=" << fmt17(r.margin)
       << "  " << r.detail << "\n";
}

inline void emit(const RunConfig& c, const json& j, const std::string& csv) {
  if (c.out.empty()) return;
  write_file(c.out, c.format == "csv" ? csv : j.dump(2) + "\n");
}

inline std::vector<Row> verify_paper51(const IfsSystem& system, const RunConfig& c) {
  const Paper51Params p = paper51_params(system);
  std::vector<Row> rows;
  const StandingAssumptions sa = check_standing_assumptions(p);
  std::string fails;
  for (const auto& f : sa.failures) fails += f + "; ";
  rows.push_back({"standing assumptions", sa.all(), true, sa.kappa - p.c, "kappa=" + fmt17(sa.kappa) + " " + fails});

  const auto red = check_irreducibility(system, SubsetSpec::finite({1, 2, 3}));
  rows.push_back({"{1,2,3} reducible", red.verdict == Irreducibility::Reducible, true, 0.0, to_string(red.verdict)});
  for (const auto& e : {"1,5", "1,5,6", "1,2+tail(5)"}) {
    const auto v = check_irreducibility(system, parse_subset(e));
    rows.push_back({std::string("{") + e + "} strongly irreducible", v.verdict == Irreducibility::StronglyIrreducible, true, 0.0,
                    to_string(v.verdict)});
  }

  const LemmaCheck si = verify_lemma_sI(p.beta, p.c, p.eta);
  rows.push_back({"beta^2s - beta^s > K^s", si.holds, false, si.margin,
                  "lhs=" + fmt17(si.lhs) + " rhs=" + fmt17(si.rhs) + " (only the eta form of the crucial bound needs it)"});

  EnumerationOptions eo;
  eo.budget = c.budget;
  eo.threads = c.threads;
  const CrucialCheck cc = verify_lemma_crucial(p, c.nmax.value_or(12), eo);
  rows.push_back({"crucial bound < 1", cc.holds, true, cc.slack, "bound=" + fmt17(cc.bound)});
  rows.push_back({"truncated P_{I'}(s) < 1", cc.cross_check_holds, true, 1.0 - cc.cross_check.upper,
                  "upper=" + fmt17(cc.cross_check.upper) + " depth=" + std::to_string(cc.cross_check.depth)});

  DimensionOptions dopt;
  dopt.tolerance = c.tolerance;
  dopt.enumeration = eo;
  const DigitMonotonicity dm = verify_digit_monotonicity(system, SubsetSpec::finite({1, 2}), 5, 6, {1, 2, 3, 4}, -1.0, dopt);
  rows.push_back({"digit replacement 6 -> 5 orders sums", dm.holds, true, dm.dim_m.hi - dm.dim_n.lo,
                  "s({1,2,6})=[" + fmt17(dm.dim_n.lo) + "," + fmt17(dm.dim_n.hi) + "]"});

  const DimensionInterval core = affinity_dimension(system, SubsetSpec::finite({1, 2, 3}), dopt);
  rows.push_back({"s({1,2,3}) contains log3/log beta", core.contains(p.s_target()) && core.certified, true,
                  std::min(p.s_target() - core.lo, core.hi - p.s_target()), "[" + fmt17(core.lo) + "," + fmt17(core.hi) + "]"});

  HoleOptions ho;
  ho.n_max = c.nmax.value_or(10);
  ho.tolerance = c.tolerance;
  ho.budget = c.budget;
  ho.threads = c.threads;
  try {
    const HoleCertificate h = certify_hole(system, ho);
    rows.push_back({"hole below log3/log beta", h.certified && h.gap_nonempty(), true, h.b - h.a,
                    "(" + fmt17(h.a) + "," + fmt17(h.b) + ") over " + std::to_string(h.subsets_checked) + " subsets"});
  } catch (const Error& e) {
    rows.push_back({"hole below log3/log beta", false, true, 0.0, e.what()});
  }
  return rows;
}

inline std::vector<Row> verify_isolated(const RunConfig& c, const IsolatedParams& params) {
  SpectrumOptions so;
  so.n_max = c.nmax.value_or(10);
  so.tolerance = c.tolerance;
  so.budget = c.budget;
  so.threads = c.threads;
  const IsolatedPointReport r = isolated_point_demo(so, params);
  std::vector<Row> rows;
  rows.push_back({"tail images pairwise disjoint", r.sosc, true, 0.0, ""});
  rows.push_back({"s_0 < log2/log4", r.s0_hi < 0.5, true, 0.5 - r.s0_hi, "s_0 <= " + fmt17(r.s0_hi)});
  rows.push_back({"three bands over enumerated subsets", r.bands_hold, true, 0.0,
                  std::to_string(r.low) + " low, " + std::to_string(r.mixed) + " mixed, " + std::to_string(r.pairs) + " pair"});
  rows.push_back({"1/2 isolated in the enumerated cloud", r.isolated, true, 0.0, ""});
  return rows;
}

}  // namespace detail

/// Executes one command; text goes to `os`, artifacts to --out.
inline int run(const RunConfig& c, std::ostream& os) {
  validate(c);
  EnumerationOptions eo;
  eo.budget = c.budget;
  eo.threads = c.threads;
  DimensionOptions dopt;
  dopt.tolerance = c.tolerance;
  dopt.enumeration = eo;

  if (c.command == Command::Demo) {
    if (c.demo == "isolated") {
      SpectrumOptions so;
      so.n_max = c.nmax.value_or(10);
      so.tolerance = c.tolerance;
      so.budget = c.budget;
      so.threads = c.threads;
      RunConfig g = c;
      if (g.gallery.empty() && g.system_path.empty()) g.gallery = "isolated52";
      const IsolatedParams params = isolated_params(make_system(g));
      const IsolatedPointReport r = isolated_point_demo(so, params);
      os << "s({1,2}) = [" << fmt17(r.pair.lo) << ", " << fmt17(r.pair.hi) << "] certified=" << r.pair.certified << "\n";
      os << "s_0 in [" << fmt17(r.s0_lo) << ", " << fmt17(r.s0_hi) << "]\n";
      os << "subsets: " << r.low << " low, " << r.mixed << " mixed, " << r.pairs << " pair; gaps=" << r.cloud.gaps.size() << "\n";
      for (const auto& ic : r.cloud.isolated_candidates)
        os << "isolated candidate [" << fmt17(ic.lo) << ", " << fmt17(ic.hi) << "] gap below " << fmt17(ic.below.width())
           << " gap above " << fmt17(ic.above.width()) << "\n";
      os << detail::yes(r.bands_hold && r.isolated) << "  three bands, 1/2 isolated (" << r.cloud.universe << ")\n";
      detail::emit(c, to_json(r.cloud), to_csv(r.cloud));
      return r.bands_hold && r.isolated ? kExitOk : kExitCheckFailed;
    }
    HoleOptions ho;
    ho.n_max = c.nmax.value_or(10);
    ho.tolerance = c.tolerance;
    ho.budget = c.budget;
    ho.threads = c.threads;
    const Paper51Params p = paper51_params(make_system(c));
    const NonCompactReport r = non_compact_demo(ho, p);
    os << "gamma = " << fmt17(r.params.gamma) << "; dim F_{1,2,3} = log3/log gamma = " << fmt17(r.hausdorff_core) << "\n";
    os << "target log3/log beta = " << fmt17(r.s_target) << "\n";
    json j;
    j["approach"] = json::array();
    for (const auto& d : r.approach) {
      os << "s(" << d.subset.to_string() << ") = [" << fmt17(d.lo) << ", " << fmt17(d.hi) << "] hi-target=" << fmt17(d.hi - r.s_target)
         << "\n";
      j["approach"].push_back(to_json(d));
    }
    os << "hole (" << fmt17(r.hole->a) << ", " << fmt17(r.hole->b) << ") certified=" << r.hole->certified << "\n";
    os << detail::yes(r.holds) << "  strictly above, decreasing (shrink " << fmt17(r.shrink_factor) << "), hole certified\n";
    j["hole"] = {r.hole->a, r.hole->b};
    j["holds"] = r.holds;
    detail::emit(c, j, "");
    return r.holds ? kExitOk : kExitCheckFailed;
  }

  const IfsSystem system = make_system(c);
  const SubsetSpec subset = c.subset_expr.empty() ? detail::default_subset(system) : parse_subset(c.subset_expr);

  switch (c.command) {
    case Command::Pressure: {
      const double s = *c.s;
      const ResolvedSubset r = system.resolve(subset);
      PressureBound b;
      if (r.tail_from) {
        const Index N = std::max<Index>(c.nmax.value_or(12), *r.tail_from - 1);
        const FamilyShape f = shape_of(system, system.truncate(subset, N));
        const unsigned n = std::max(1u, std::min(feasible_depth(f.letters.size(), c.budget), 30u));
        b = truncate_with_tail(system, subset, s, N, n, eo);
      } else {
        const FamilyShape f = shape_of(system, subset);
        const unsigned n = std::max(1u, std::min(feasible_depth(f.letters.size(), c.budget), 30u));
        b = pressure_bound(system, subset, s, n, eo);
      }
      os << "P_{" << b.subset.to_string() << "}(" << fmt17(s) << ") in [" << fmt17(b.lower) << ", " << fmt17(b.upper)
         << "] depth=" << b.depth << " method=" << to_string(b.method) << " certified=" << (b.lower_certified ? "true" : "false")
         << "\n";
      detail::emit(c, to_json(b),
                   "subset;s;depth;lower;upper;method;certified\n" + b.subset.to_string() + ";" + fmt17(s) + ";" +
                       std::to_string(b.depth) + ";" + fmt17(b.lower) + ";" + fmt17(b.upper) + ";" + to_string(b.method) + ";" +
                       (b.lower_certified ? "true" : "false") + "\n");
      return kExitOk;
    }
    case Command::Dim: {
      DimensionOptions d = dopt;
      if (c.nmax && !subset.is_finite()) d.truncation = *c.nmax;
      const DimensionInterval iv = affinity_dimension(system, subset, d);
      os << "s(" << iv.subset.to_string() << ") in [" << fmt17(iv.lo) << ", " << fmt17(iv.hi) << "] width=" << fmt17(iv.width())
         << " method=" << iv.method << " certified=" << (iv.certified ? "true" : "false") << " depth=" << iv.depth_used
         << " words=" << iv.words_used << "\n";
      detail::emit(c, to_json(iv),
                   "subset;lo;hi;certified;method\n" + iv.subset.to_string() + ";" + fmt17(iv.lo) + ";" + fmt17(iv.hi) + ";" +
                       (iv.certified ? "true" : "false") + ";" + iv.method + "\n");
      return kExitOk;
    }
    case Command::Spectrum: {
      SpectrumOptions so;
      so.n_max = c.nmax.value_or(10);
      so.tolerance = c.tolerance;
      so.budget = c.budget;
      so.threads = c.threads;
      const SpectrumCloud cloud = enumerate_spectrum(system, so);
      os << cloud.points.size() << " subsets, " << cloud.gaps.size() << " gaps, " << cloud.isolated_candidates.size()
         << " isolated candidates (" << cloud.universe << ")" << (cloud.partial ? " PARTIAL" : "") << "\n";
      for (const auto& p : cloud.points)
        os << p.subset.to_string() << ";" << fmt17(p.interval.lo) << ";" << fmt17(p.interval.hi) << ";"
           << (p.interval.certified ? "true" : "false") << ";" << p.interval.method << "\n";
      detail::emit(c, to_json(cloud), to_csv(cloud));
      return kExitOk;
    }
    case Command::Verify: {
      std::vector<detail::Row> rows;
      const std::string& g = system.gallery().name;
      if (g == "paper51") rows = detail::verify_paper51(system, c);
      else if (g == "isolated52") rows = detail::verify_isolated(c, isolated_params(system));
      else throw Error(ErrorCode::InvalidArgument, "verify supports the paper51 and isolated52 galleries");
      detail::print_rows(os, rows);
      bool ok = true;
      json j = json::array();
      for (const auto& r : rows) {
        if (r.counted) ok = ok && r.pass;
        j.push_back({{"check", r.name}, {"pass", r.pass}, {"counted", r.counted}, {"margin", r.margin}, {"detail", r.detail}});
      }
      std::string csv = "check;pass;counted;margin\n";
      for (const auto& r : rows)
        csv += r.name + ";" + (r.pass ? "true" : "false") + ";" + (r.counted ? "true" : "false") + ";" + fmt17(r.margin) + "\n";
      detail::emit(c, j, csv);
      os << (ok ? "all certified checks passed" : "some certified checks FAILED") << "\n";
      return ok ? kExitOk : kExitCheckFailed;
    }
    case Command::Demo:
      break;
  }
  return kExitOk;
}

/// Full entry point: parse, run, map errors to exit codes.
inline int main_entry(int argc, char** argv, std::ostream& os, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  RunConfig c;
  try {
    c = parse_args(args);
  } catch (const CLI::CallForHelp&) {
    RunConfig tmp;
    std::string pt;
    CLI::App app{"affdim: certified pressure and affinity dimension of planar self-affine systems"};
    detail::build_app(app, tmp, pt);
    os << app.help();
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  try {
    return run(c, os);
  } catch (const Error& e) {
    err << "error: " << e.what();
    if (!c.subset_expr.empty()) err << " (subset " << c.subset_expr << ")";
    err << "\n";
    return (e.code() == ErrorCode::ConfigParse || e.code() == ErrorCode::FileIO) ? kExitConfig : kExitError;
  }
}

}  // namespace affdim
