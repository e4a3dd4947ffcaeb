#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <sstream>

#include "CLI11.hpp"

#include "ancod/coder.hpp"
#include "ancod/frame_opt.hpp"
#include "ancod/patterns.hpp"
#include "ancod/rd_model.hpp"
#include "ancod/spectral.hpp"

namespace ancod::cli {

namespace {

using Json = nlohmann::ordered_json;

Json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string csv_cell(const Json& v) {
  if (v.is_number_float()) return format_double(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Json>> rows;
};

// One output file: a header block, a flat summary and zero or more tables.
struct Document {
  Json header;
  Json summary = Json::object();
  std::vector<Table> tables;
};

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

Document make_document(const ExperimentConfig& config) {
  Document d;
  d.header = Json::object();
  d.header["tool"] = kToolName;
  d.header["version"] = kVersion;
  d.header["subcommand"] = config.subcommand;
  d.header["config"] = config_json(config);
  d.header["seed"] = config.seed;
  d.header["timestamp"] = utc_timestamp();
  return d;
}

void write_csv(std::ostream& os, const Document& d) {
  // The timestamp sits on its own line so reproducibility checks can drop it.
  for (const auto& [key, value] : d.header.items()) os << "# " << key << ": " << csv_cell(value) << '\n';
  for (const auto& [key, value] : d.summary.items()) os << "# " << key << ": " << csv_cell(value) << '\n';
  for (std::size_t t = 0; t < d.tables.size(); ++t) {
    const Table& table = d.tables[t];
    if (d.tables.size() > 1) {
      if (t > 0) os << '\n';
      os << "# table: " << table.name << '\n';
    }
    for (std::size_t c = 0; c < table.columns.size(); ++c) os << (c ? "," : "") << table.columns[c];
    os << '\n';
    for (const auto& row : table.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << csv_cell(row[c]);
      os << '\n';
    }
  }
}

void write_json(std::ostream& os, const Document& d) {
  Json doc = Json::object();
  doc["header"] = d.header;
  doc["summary"] = d.summary;
  Json tables = Json::object();
  for (const auto& t : d.tables) {
    Json rows = Json::array();
    for (const auto& r : t.rows) rows.push_back(r);
    tables[t.name] = {{"columns", t.columns}, {"rows", rows}};
  }
  doc["tables"] = tables;
  os << doc.dump(2) << '\n';
}

void emit(const Document& d, const ExperimentConfig& config, const std::string& path, std::ostream& fallback) {
  auto write = [&](std::ostream& os) {
    if (config.format == "json") {
      write_json(os, d);
    } else {
      write_csv(os, d);
    }
  };
  if (path.empty()) {
    write(fallback);
    return;
  }
  std::ofstream file(path);
  if (!file) throw ConfigError("cannot open output file '" + path + "'");
  write(file);
}

/// foo/bar.csv -> foo/bar_zoom.csv
std::string with_suffix(const std::string& path, const std::string& suffix) {
  const auto slash = path.find_last_of('/');
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + suffix;
  return path.substr(0, dot) + suffix + path.substr(dot);
}

FrameKind kind_for_label(const std::string& label) {
  if (label == "bl") return FrameKind::bandlimited_dft;
  if (label == "iid") return FrameKind::random_iid;
  if (label == "dss") return FrameKind::dss;
  if (label == "spectrum") return FrameKind::dft_spectrum;
  if (label == "paley") return FrameKind::paley_etf;
  throw ConfigError("unknown frame kind '" + label + "'; expected bl, iid, dss, spectrum or paley");
}

std::string dims(const Geometry& g) {
  return "n = " + std::to_string(g.n) + ", m = " + std::to_string(g.m) + ", k = " + std::to_string(g.k);
}

void check_beta_range(const ExperimentConfig& c) {
  if (c.beta && c.p) {
    if (!(*c.p > 0.0 && *c.p <= 1.0)) throw ConfigError("--p must lie in (0, 1]");
    if (!(*c.beta >= 1.0 && *c.beta <= 1.0 / *c.p + 1e-12)) {
      throw ConfigError("--beta " + format_double(*c.beta) + " is outside [1, 1/p] = [1, " + format_double(1.0 / *c.p) +
                        "]; beta = m/k needs k <= m <= n");
    }
  }
}

Json geometry_json(const Geometry& g) {
  return {{"frame", g.label}, {"n", g.n}, {"m", g.m}, {"k", g.k}, {"beta", g.beta()}, {"p", g.p()}};
}

std::vector<Geometry> resolve_all(const ExperimentConfig& c) {
  std::vector<Geometry> out;
  for (const auto& label : c.frames) out.push_back(resolve_geometry(c, label));
  return out;
}

int default_trials(const ExperimentConfig& c, int fallback) { return c.trials.value_or(fallback); }

// Subcommands --------------------------------------------------------------

void cmd_ie_hist(const ExperimentConfig& c, std::ostream& out) {
  Document d = make_document(c);
  Table table{"log_histogram", {"frame", "bin_lo", "bin_hi", "count"}, {}};
  Json frames = Json::array();
  for (const Geometry& g : resolve_all(c)) {
    const Frame frame = build_frame(g, c);
    IEOptions opt;
    opt.mode = c.exhaustive ? StatMode::exhaustive : StatMode::monte_carlo;
    opt.trials = default_trials(c, 2000);
    opt.seed = c.seed;
    opt.bins = c.bins.value_or(60);
    const IEStats s = ie_statistics(frame, g.k, opt);
    Json entry = geometry_json(g);
    entry["stats"] = ie_summary_json(s);
    entry["median_log10_eta"] = num(std::log10(s.median));
    entry["lower_bound"] = static_cast<double>(g.k) / g.m;
    entry["iid_limit"] = num(mp_eta_limit(g.beta()));
    entry["manova_limit"] = g.m < g.n ? num(manova_eta_limit(g.beta(), static_cast<double>(g.m) / g.n)) : Json("nan");
    frames.push_back(entry);
    const LogHistogram& h = s.log_histogram;
    for (int b = 0; b < static_cast<int>(h.counts.size()); ++b) {
      const bool top = b + 1 == static_cast<int>(h.counts.size());
      table.rows.push_back({g.label, num(h.bin_lo(b)), top ? Json("divergent") : num(h.bin_hi(b)),
                            h.counts[static_cast<std::size_t>(b)]});
    }
  }
  d.summary["frames"] = frames;
  d.tables.push_back(std::move(table));
  emit(d, c, c.out, out);
}

void cmd_eig_hist(const ExperimentConfig& c, std::ostream& out) {
  const std::vector<Geometry> geoms = resolve_all(c);
  const int trials = default_trials(c, 200);
  const int bins = c.bins.value_or(100);
  std::vector<std::vector<double>> pooled;
  double upper = 0.0;
  for (const Geometry& g : geoms) {
    pooled.push_back(pooled_gram_eigenvalues(build_frame(g, c), g.k, trials, c.seed));
    const auto& v = pooled.back();
    upper = std::max({upper, static_cast<double>(g.n) / g.m, *std::max_element(v.begin(), v.end())});
  }
  // References use the first frame's realized geometry.
  const Geometry& ref = geoms.front();
  std::vector<NamedDensity> refs{{"mp", DensityCurve::marchenko_pastur(ref.beta())}};
  if (ref.m < ref.n) refs.push_back({"manova", DensityCurve::manova(static_cast<double>(ref.m) / ref.n, ref.beta())});

  auto build = [&](double hi, int nbins, const std::string& name) {
    Document d = make_document(c);
    Table table{name, {"bin_center"}, {}};
    std::vector<EigenHistogram> hists;
    Json frames = Json::array();
    for (std::size_t i = 0; i < geoms.size(); ++i) {
      hists.push_back(histogram_of_eigenvalues(pooled[i], nbins, hi));
      table.columns.push_back(geoms[i].label + "_density");
      Json entry = geometry_json(geoms[i]);
      entry["min_eigenvalue"] = hists.back().min_eigenvalue;
      entry["max_eigenvalue"] = hists.back().max_eigenvalue;
      entry["sample_count"] = hists.back().sample_count;
      if (name == "eigen_histogram") {
        for (const auto& r : refs) entry["l1_" + r.name] = l1_distance(hists.back(), r.curve);
      }
      frames.push_back(entry);
    }
    for (const auto& r : refs) table.columns.push_back(r.name + "_density");
    const EigenHistogram& h0 = hists.front();
    for (int b = 0; b < nbins; ++b) {
      std::vector<Json> row{h0.center(b)};
      for (const auto& h : hists) row.emplace_back(h.density[static_cast<std::size_t>(b)]);
      const double lo = h0.edges[static_cast<std::size_t>(b)];
      const double up = h0.edges[static_cast<std::size_t>(b) + 1];
      for (const auto& r : refs) row.emplace_back(r.curve.mass(lo, up) / h0.width());
      table.rows.push_back(std::move(row));
    }
    d.summary["range"] = {0.0, hi};
    d.summary["trials"] = trials;
    d.summary["reference_frame"] = ref.label;
    d.summary["frames"] = frames;
    d.tables.push_back(std::move(table));
    return d;
  };
  const Document main_doc = build(upper, bins, "eigen_histogram");
  const Document zoom_doc = build(0.2, bins, "eigen_histogram_zoom");
  emit(main_doc, c, c.out, out);
  if (c.out.empty()) {
    out << '\n';
    emit(zoom_doc, c, "", out);
  } else {
    emit(zoom_doc, c, with_suffix(c.out, "_zoom"), out);
  }
}

void cmd_rate_loss(const ExperimentConfig& c, std::ostream& out) {
  const double p = c.p.value_or(0.2);
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("--p must lie in (0, 1) for rate-loss");
  check_beta_range(c);
  const std::vector<double> grid = c.sdr_db ? std::vector<double>{*c.sdr_db} : parse_sdr_grid(c.sdr_grid);
  const double si = si_benchmark(p);
  Document d = make_document(c);
  Table table{"rate_loss", {"sdr_db", "gamma", "beta_opt", "delta_opt", "si_bits", "asymptote_bits"}, {}};
  if (c.beta) table.columns.push_back("delta_fixed_beta");
  std::vector<double> delta;
  for (double db : grid) {
    const double gamma = db_to_gamma(db);
    std::vector<Json> row{db, gamma};
    if (gamma > 1.0) {
      const BetaOptimum opt = optimize_beta(p, gamma);
      row.emplace_back(opt.beta);
      row.emplace_back(opt.delta);
      delta.push_back(opt.delta);
    } else {
      row.emplace_back("nan");
      row.emplace_back(0.0);
      delta.push_back(0.0);
    }
    row.emplace_back(si);
    row.push_back(gamma > std::numbers::e ? num(high_sdr_asymptote(p, gamma)) : Json("nan"));
    if (c.beta) row.push_back(num(random_transform_excess(p, *c.beta, gamma)));
    table.rows.push_back(std::move(row));
  }
  // Sign changes of δ(β*) - H_b(p) along the grid; location by linear interpolation.
  Json crossings = Json::array();
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double a = delta[i - 1] - si;
    const double b = delta[i] - si;
    if ((a < 0.0) != (b < 0.0)) crossings.push_back(grid[i - 1] + (grid[i] - grid[i - 1]) * a / (a - b));
  }
  d.summary["p"] = p;
  d.summary["si_bits"] = si;
  d.summary["crossings"] = crossings.size();
  d.summary["crossover_sdr_db"] = crossings.empty() ? Json("none") : crossings.front();
  d.summary["max_delta_opt"] = *std::max_element(delta.begin(), delta.end());
  d.tables.push_back(std::move(table));
  emit(d, c, c.out, out);
}

void cmd_mlie(const ExperimentConfig& c, std::ostream& out) {
  Document d = make_document(c);
  Json frames = Json::array();
  for (const Geometry& g : resolve_all(c)) {
    const Frame frame = build_frame(g, c);
    IEOptions opt;
    if (c.mode == "exhaustive") {
      opt.mode = StatMode::exhaustive;
    } else if (c.mode == "mc") {
      opt.mode = StatMode::monte_carlo;
    } else if (c.mode == "auto") {
      opt.mode = binomial(g.n, g.k) <= kEnumerationGuard ? StatMode::exhaustive : StatMode::monte_carlo;
    } else {
      throw ConfigError("--mode must be auto, exhaustive or mc");
    }
    opt.trials = default_trials(c, 2000);
    opt.seed = c.seed;
    const IEStats s = ie_statistics(frame, g.k, opt);
    Json entry = geometry_json(g);
    entry["stats"] = ie_summary_json(s);
    frames.push_back(entry);
  }
  d.summary["frames"] = frames;
  emit(d, c, c.out, out);
}

void cmd_coder(const ExperimentConfig& c, std::ostream& out) {
  if (c.sigma_q2 && c.sdr_db) throw ConfigError("give either --sigma-q2 or --sdr-db, not both");
  double sigma_q2 = c.sigma_q2.value_or(1.0);
  if (c.sdr_db) sigma_q2 = noise_for_sdr(c.sigma_x2, db_to_gamma(*c.sdr_db));
  Document d = make_document(c);
  Json frames = Json::array();
  std::ofstream trace;
  if (!c.trace.empty()) {
    trace.open(c.trace);
    if (!trace) throw ConfigError("cannot open trace file '" + c.trace + "'");
  }
  for (const Geometry& g : resolve_all(c)) {
    const Frame frame = build_frame(g, c);
    CoderOptions opt;
    opt.noiseless = c.noiseless;
    opt.record_trace = !c.trace.empty();
    const CoderReport r = simulate(frame, g.k, c.sigma_x2, sigma_q2, default_trials(c, 10000), c.seed, opt);
    Json entry = geometry_json(g);
    const nlohmann::json report = coder_report_json(r);
    for (const auto& [key, value] : report.items()) entry[key] = value;
    entry["rdf_bits"] = c.noiseless ? Json("inf") : num(rdf(g.p(), sdr_from_noise(c.sigma_x2, sigma_q2)));
    frames.push_back(entry);
    if (trace) {
      trace << "# frame: " << g.label << '\n';
      write_coder_trace_csv(trace, r);
    }
  }
  d.summary["sigma_q2"] = sigma_q2;
  d.summary["frames"] = frames;
  emit(d, c, c.out, out);
}

Json verdicts_json(const OptReport& r) {
  Json v = Json::array();
  for (const auto& pv : r.perturbation_verdicts) {
    v.push_back({{"epsilon", pv.epsilon},
                 {"trials", pv.trials},
                 {"fraction_decreased", pv.fraction_decreased},
                 {"fraction_decreased_by_1e-4", pv.fraction_decreased_by(1e-4)},
                 {"max_decrease", num(pv.max_decrease)}});
  }
  return v;
}

void cmd_optimize(const ExperimentConfig& c, std::ostream& out) {
  if (c.frames.size() != 1) throw ConfigError("optimize takes exactly one --frame");
  const Geometry g = resolve_geometry(c, c.frames.front());
  const Frame init = build_frame(g, c);
  Document d = make_document(c);
  d.summary["geometry"] = geometry_json(g);
  Frame final_frame = init;
  if (!c.verify_only) {
    LocalSearchOptions opt;
    opt.pattern_budget = c.budget;
    opt.max_iterations = c.iterations;
    auto result = local_search(init, g.k, opt, c.seed);
    d.summary["initial_mlie"] = result.report.initial_mlie;
    d.summary["final_mlie"] = result.report.final_mlie;
    d.summary["iterations"] = result.report.iterations;
    d.summary["converged"] = result.report.converged;
    d.summary["exhaustive"] = result.report.exhaustive;
    d.summary["pattern_count"] = result.report.pattern_count;
    d.summary["fresh_initial_mlie"] = num(result.report.fresh_initial_mlie);
    d.summary["fresh_final_mlie"] = num(result.report.fresh_final_mlie);
    Table traj{"trajectory", {"iteration", "sampled_mlie", "step"}, {}};
    for (const auto& s : result.report.step_history) traj.rows.push_back({s.iteration, s.mlie, s.step});
    d.tables.push_back(std::move(traj));
    final_frame = std::move(result.frame);
  }
  if (!c.epsilons.empty()) {
    VerifyOptions vopt;
    vopt.mode = binomial(g.n, g.k) <= kEnumerationGuard ? StatMode::exhaustive : StatMode::monte_carlo;
    const OptReport v = verify_local_min(final_frame, g.k, c.epsilons, c.verify_trials, c.seed, vopt);
    d.summary["verified_mlie"] = v.initial_mlie;
    d.summary["verification_exhaustive"] = v.exhaustive;
    d.summary["verdicts"] = verdicts_json(v);
  }
  if (!c.frame_out.empty()) save_frame(c.frame_out, final_frame);
  emit(d, c, c.out, out);
}

void cmd_construct(const ExperimentConfig& c, std::ostream& out) {
  if (c.frames.size() != 1) throw ConfigError("construct takes exactly one --frame");
  ExperimentConfig cc = c;
  // For the difference-set construction --p names the prime order.
  if (c.frames.front() == "dss" && !c.n && c.p) {
    const double prime = *c.p;
    if (prime != std::floor(prime) || prime < 3) throw ConfigError("construct dss --p expects a prime order such as 7");
    cc.n = static_cast<int>(prime);
    cc.p.reset();
  }
  const Geometry g = resolve_geometry(cc, c.frames.front());
  const Frame frame = build_frame(g, cc);
  Document d = make_document(c);
  d.summary["geometry"] = geometry_json(g);
  const ETFReport r = verify_etf(frame);
  d.summary["is_tight"] = r.is_tight;
  d.summary["tightness_error"] = r.tightness_error;
  d.summary["is_equiangular"] = r.is_equiangular;
  d.summary["coherence_min"] = r.coherence_min;
  d.summary["coherence_max"] = r.coherence_max;
  d.summary["welch_bound"] = r.welch_bound;
  d.summary["max_welch_deviation"] = r.max_welch_deviation;
  if (g.kind == FrameKind::dss) {
    const DifferenceSet ds = quadratic_difference_set(g.n);
    d.summary["difference_set"] = ds.elements;
    d.summary["lambda"] = ds.lambda;
    d.summary["is_difference_set"] = is_difference_set(ds);
  }
  if (!c.frame_out.empty()) {
    save_frame(c.frame_out, frame);
    d.summary["frame_file"] = c.frame_out;
  }
  emit(d, c, c.out, out);
}

void add_common(CLI::App* sub, ExperimentConfig& c, bool frames = true) {
  sub->add_option("--n", c.n, "frame length n");
  sub->add_option("--m", c.m, "frame dimension m (default floor(n/2))");
  sub->add_option("--k", c.k, "number of important samples k");
  sub->add_option("--beta", c.beta, "beta = m/k, used when --k is absent");
  sub->add_option("--p", c.p, "erasure fraction p = k/n");
  if (frames) {
    sub->add_option("--frame", c.frames, "frame kinds: bl, iid, dss, spectrum, paley (comma separated)")
        ->delimiter(',')
        ->check(CLI::IsMember({"bl", "iid", "dss", "spectrum", "paley"}));
    sub->add_option("--field", c.field, "field for random i.i.d. frames")->check(CLI::IsMember({"real", "complex"}));
  }
  sub->add_option("--sdr-db", c.sdr_db, "single SDR in dB");
  sub->add_option("--sdr-grid", c.sdr_grid, "SDR grid lo:hi:step in dB");
  sub->add_option("--trials", c.trials, "Monte Carlo trials");
  sub->add_option("--seed", c.seed, "random seed");
  sub->add_option("--bins", c.bins, "histogram bins");
  sub->add_option("--out", c.out, "output path (stdout when absent)");
  sub->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
}

}  // namespace

Geometry resolve_geometry(const ExperimentConfig& c, const std::string& label) {
  Geometry g;
  g.label = label;
  g.kind = kind_for_label(label);
  if (!c.n) throw ConfigError("--n is required");
  g.n = *c.n;
  if (g.n < 1) throw ConfigError("--n must be positive");
  switch (g.kind) {
    case FrameKind::dss: {
      try {
        g.m = quadratic_difference_set(g.n).m;
      } catch (const ConstructionError& e) {
        throw ConfigError(std::string("dss frame: ") + e.what());
      }
      if (c.m && *c.m != g.m) throw ConfigError("dss frame fixes m = (n-1)/2 = " + std::to_string(g.m));
      break;
    }
    case FrameKind::paley_etf: {
      if (g.n % 2 != 0) throw ConfigError("paley frame needs even n");
      g.m = g.n / 2;
      if (c.m && *c.m != g.m) throw ConfigError("paley frame fixes m = n/2 = " + std::to_string(g.m));
      break;
    }
    default:
      g.m = c.m.value_or(g.n / 2);
  }
  if (g.m < 1) throw ConfigError("m must be at least 1");
  if (g.m > g.n) throw ConfigError("m = " + std::to_string(g.m) + " exceeds n = " + std::to_string(g.n) + "; need m <= n");
  check_beta_range(c);
  if (c.k) {
    g.k = *c.k;
  } else if (c.beta) {
    if (!(*c.beta >= 1.0)) throw ConfigError("--beta must be at least 1 (k <= m)");
    g.k = static_cast<int>(std::lround(g.m / *c.beta));
  } else if (c.p) {
    g.k = static_cast<int>(std::lround(*c.p * g.n));
  } else {
    g.k = static_cast<int>(std::lround(g.m / 1.25));
  }
  if (g.k < 1) throw ConfigError("k must be at least 1 (" + dims(g) + ")");
  if (g.k > g.m) {
    throw ConfigError("k = " + std::to_string(g.k) + " exceeds m = " + std::to_string(g.m) +
                      "; choose k <= m or a larger --beta");
  }
  return g;
}

Frame build_frame(const Geometry& g, const ExperimentConfig& c) {
  switch (g.kind) {
    case FrameKind::bandlimited_dft:
      return build_bandlimited_dft(g.n, g.m);
    case FrameKind::random_iid:
      return build_random_iid(g.n, g.m, parse_field(c.field), c.seed);
    case FrameKind::dss:
      return build_dss(g.n);
    case FrameKind::dft_spectrum:
      return build_random_spectrum(g.n, g.m, c.seed);
    case FrameKind::paley_etf:
      return build_paley_etf(g.n);
    default:
      throw ConfigError("unsupported frame kind");
  }
}

std::vector<double> parse_sdr_grid(const std::string& spec) {
  std::vector<double> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ':')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("--sdr-grid '" + spec + "' is not of the form lo:hi:step");
    }
  }
  if (parts.size() != 3) throw ConfigError("--sdr-grid '" + spec + "' is not of the form lo:hi:step");
  const double lo = parts[0];
  const double hi = parts[1];
  const double step = parts[2];
  if (!(step > 0.0) || hi < lo) throw ConfigError("--sdr-grid needs lo <= hi and step > 0");
  std::vector<double> grid;
  const auto count = static_cast<long long>(std::floor((hi - lo) / step + 1e-9));
  if (count > 1000000) throw ConfigError("--sdr-grid has too many points");
  for (long long i = 0; i <= count; ++i) grid.push_back(lo + static_cast<double>(i) * step);
  return grid;
}

Json config_json(const ExperimentConfig& c) {
  Json j = Json::object();
  auto opt = [&](const char* key, const auto& v) {
    if (v) j[key] = *v;
  };
  opt("n", c.n);
  opt("m", c.m);
  opt("k", c.k);
  opt("beta", c.beta);
  opt("p", c.p);
  if (!c.frames.empty()) j["frames"] = c.frames;
  j["field"] = c.field;
  opt("sdr_db", c.sdr_db);
  j["sdr_grid"] = c.sdr_grid;
  opt("trials", c.trials);
  j["seed"] = c.seed;
  opt("bins", c.bins);
  j["format"] = c.format;
  if (c.subcommand == "mlie") j["mode"] = c.mode;
  if (c.subcommand == "ie-hist") j["exhaustive"] = c.exhaustive;
  if (c.subcommand == "coder") {
    j["sigma_x2"] = c.sigma_x2;
    opt("sigma_q2", c.sigma_q2);
    j["noiseless"] = c.noiseless;
  }
  if (c.subcommand == "optimize") {
    j["epsilons"] = c.epsilons;
    j["verify_trials"] = c.verify_trials;
    j["iterations"] = c.iterations;
    j["budget"] = c.budget;
    j["verify_only"] = c.verify_only;
  }
  return j;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Analog coding with erasures: frames, inverse energy, spectra and rate loss", kToolName};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  ExperimentConfig c;

  auto* ie = app.add_subcommand("ie-hist", "log-histogram of the inverse energy over erasure patterns");
  add_common(ie, c);
  ie->add_flag("--exhaustive", c.exhaustive, "enumerate all C(n, k) patterns");

  auto* eig = app.add_subcommand("eig-hist", "eigenvalue histogram of A_sA_s' with MP and MANOVA overlays");
  add_common(eig, c);

  auto* rate = app.add_subcommand("rate-loss", "optimal-beta excess rate of random transforms over an SDR grid");
  add_common(rate, c, false);

  auto* mlie = app.add_subcommand("mlie", "mean log inverse energy of a frame");
  add_common(mlie, c);
  mlie->add_option("--mode", c.mode, "auto, exhaustive or mc")->check(CLI::IsMember({"auto", "exhaustive", "mc"}));

  auto* coder = app.add_subcommand("coder", "Monte Carlo run of the analog coding chain");
  add_common(coder, c);
  coder->add_option("--sigma-x2", c.sigma_x2, "source variance");
  coder->add_option("--sigma-q2", c.sigma_q2, "quantization noise variance (default 1)");
  coder->add_flag("--noiseless", c.noiseless, "drop the noise and use alpha = 1");
  coder->add_option("--trace", c.trace, "per-trial CSV trace path");

  auto* optimize = app.add_subcommand("optimize", "MLIE local search and local-minimum verification");
  add_common(optimize, c);
  optimize->add_option("--epsilons", c.epsilons, "perturbation sizes for verification")->delimiter(',');
  optimize->add_option("--verify-trials", c.verify_trials, "perturbations per epsilon");
  optimize->add_option("--iterations", c.iterations, "maximum descent iterations");
  optimize->add_option("--budget", c.budget, "pattern budget of the descent objective");
  optimize->add_flag("--verify-only", c.verify_only, "skip descent and only verify the start frame");
  optimize->add_option("--frame-out", c.frame_out, "write the final frame here");

  auto* construct = app.add_subcommand("construct", "build a frame and certify tightness / equiangularity");
  add_common(construct, c);
  construct->add_option("--frame-out", c.frame_out, "write the frame here");

  struct Defaults {
    CLI::App* app;
    int n;
    std::vector<std::string> frames;
  };
  const std::vector<Defaults> defaults{{ie, 101, {"bl"}},       {eig, 947, {"iid", "dss"}}, {rate, 0, {}},
                                       {mlie, 7, {"dss"}},      {coder, 16, {"bl"}},        {optimize, 7, {"dss"}},
                                       {construct, 0, {"dss"}}};

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  const CLI::App* chosen = app.get_subcommands().front();
  c.subcommand = chosen->get_name();
  for (const auto& def : defaults) {
    if (def.app != chosen) continue;
    if (!c.n && def.n > 0) c.n = def.n;
    if (c.frames.empty()) c.frames = def.frames;
  }
  if (c.subcommand == "construct" && !c.n && !c.p) c.n = 7;

  try {
    if (c.subcommand == "ie-hist") cmd_ie_hist(c, out);
    else if (c.subcommand == "eig-hist") cmd_eig_hist(c, out);
    else if (c.subcommand == "rate-loss") cmd_rate_loss(c, out);
    else if (c.subcommand == "mlie") cmd_mlie(c, out);
    else if (c.subcommand == "coder") cmd_coder(c, out);
    else if (c.subcommand == "optimize") cmd_optimize(c, out);
    else if (c.subcommand == "construct") cmd_construct(c, out);
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const DimensionError& e) {
    err << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const ConstructionError& e) {
    err << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    err << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const GuardError& e) {
    err << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const SingularError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const Error& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 3;
  }
  return 0;
}

}  // namespace ancod::cli
