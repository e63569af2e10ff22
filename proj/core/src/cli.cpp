#include "covsel/cli.hpp"

#include <bit>
#include <charconv>
#include <functional>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include "json.hpp"

#include "covsel/error.hpp"
#include "covsel/estimator.hpp"
#include "covsel/io.hpp"
#include "covsel/selection.hpp"
#include "covsel/simulate.hpp"
#include "covsel/validate.hpp"

namespace covsel::cli {

using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
  throw InputError("config key '" + key + "': '" + value + "' is not " + expected);
}

template <typename T>
T parse_number(const std::string& key, const std::string& raw, const char* expected) {
  const auto v = trim(raw);
  T out{};
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    bad_value(key, raw, expected);
  }
  return out;
}

std::size_t parse_count(const std::string& key, const std::string& raw) {
  return parse_number<std::size_t>(key, raw, "a non-negative integer");
}

double parse_real(const std::string& key, const std::string& raw) {
  return parse_number<double>(key, raw, "a real number");
}

bool parse_bool(const std::string& key, const std::string& raw) {
  const auto v = trim(raw);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, raw, "a boolean");
}

std::vector<std::string> split_list(const std::string& raw) {
  std::vector<std::string> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"data.input", [](RunConfig& c, auto&, auto& v) { c.input = trim(v); }},
      {"data.center", [](RunConfig& c, auto& k, auto& v) { c.center = parse_bool(k, v); }},
      {"basis.family", [](RunConfig& c, auto&, auto& v) { c.family = dict::parse_basis_kind(trim(v)); }},
      {"basis.max_index", [](RunConfig& c, auto& k, auto& v) { c.max_index = parse_count(k, v); }},
      {"basis.t_min", [](RunConfig& c, auto& k, auto& v) { c.basis_t_min = parse_real(k, v); }},
      {"basis.t_max", [](RunConfig& c, auto& k, auto& v) { c.basis_t_max = parse_real(k, v); }},
      {"collection.scheme", [](RunConfig& c, auto&, auto& v) { c.scheme = dict::parse_scheme_kind(trim(v)); }},
      {"collection.max_dim", [](RunConfig& c, auto& k, auto& v) { c.max_dim = parse_count(k, v); }},
      {"collection.subset_size", [](RunConfig& c, auto& k, auto& v) { c.subset_size = parse_count(k, v); }},
      {"collection.subset_guard", [](RunConfig& c, auto& k, auto& v) { c.subset_guard = parse_count(k, v); }},
      {"selection.theta", [](RunConfig& c, auto& k, auto& v) { c.theta = parse_real(k, v); }},
      {"output.out", [](RunConfig& c, auto&, auto& v) { c.out = trim(v); }},
      {"output.replications_csv", [](RunConfig& c, auto& k, auto& v) { c.replications_csv = parse_bool(k, v); }},
      {"run.seed", [](RunConfig& c, auto& k, auto& v) { c.seed = parse_number<std::uint64_t>(k, v, "an unsigned integer"); }},
      {"run.threads", [](RunConfig& c, auto& k, auto& v) { c.threads = parse_number<unsigned>(k, v, "an unsigned integer"); }},
      {"run.reps", [](RunConfig& c, auto& k, auto& v) { c.reps = parse_count(k, v); }},
      {"grid.p", [](RunConfig& c, auto& k, auto& v) { c.grid_p = parse_count(k, v); }},
      {"grid.t_min", [](RunConfig& c, auto& k, auto& v) { c.grid_t_min = parse_real(k, v); }},
      {"grid.t_max", [](RunConfig& c, auto& k, auto& v) { c.grid_t_max = parse_real(k, v); }},
      {"kernel.kind", [](RunConfig& c, auto&, auto& v) { c.kernel.kind = sim::parse_kernel_kind(trim(v)); }},
      {"kernel.length_scale", [](RunConfig& c, auto& k, auto& v) { c.kernel.length_scale = parse_real(k, v); }},
      {"kernel.family", [](RunConfig& c, auto&, auto& v) { c.kernel.family.kind = dict::parse_basis_kind(trim(v)); }},
      {"kernel.max_index", [](RunConfig& c, auto& k, auto& v) { c.kernel.family.max_index = parse_count(k, v); }},
      {"kernel.indices",
       [](RunConfig& c, auto& k, auto& v) {
         c.kernel.indices.clear();
         for (const auto& item : split_list(v)) c.kernel.indices.push_back(parse_count(k, item));
       }},
      {"kernel.psi",
       [](RunConfig& c, auto& k, auto& v) {
         const auto items = split_list(v);
         linalg::Vector diag(static_cast<Eigen::Index>(items.size()));
         for (std::size_t i = 0; i < items.size(); ++i) diag(static_cast<Eigen::Index>(i)) = parse_real(k, items[i]);
         c.kernel.psi = diag.asDiagonal();
       }},
      {"simulate.n", [](RunConfig& c, auto& k, auto& v) { c.n = parse_count(k, v); }},
      {"simulate.n_grid",
       [](RunConfig& c, auto& k, auto& v) {
         c.n_grid.clear();
         for (const auto& item : split_list(v)) c.n_grid.push_back(parse_count(k, item));
       }},
      {"simulate.diagnostics", [](RunConfig& c, auto& k, auto& v) { c.diagnostics = parse_bool(k, v); }},
      {"simulate.alpha", [](RunConfig& c, auto& k, auto& v) { c.alpha = parse_real(k, v); }},
      {"validate.instances", [](RunConfig& c, auto& k, auto& v) { c.validate_instances = parse_count(k, v); }},
      {"validate.inject_fault", [](RunConfig& c, auto& k, auto& v) { c.inject_fault = parse_bool(k, v); }},
  };
  return table;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw InputError(std::string("config parse error: ") + e.what());
  }
  RunConfig cfg;
  for (const auto& [section, entries] : tree) {
    if (entries.empty()) {
      throw InputError("config key '" + section + "' must appear inside a [section]");
    }
    for (const auto& [key, node] : entries) {
      const std::string full = section + "." + key;
      const auto it = setters().find(full);
      if (it == setters().end()) throw InputError("unknown config key '" + full + "'");
      it->second(cfg, full, node.data());
    }
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void apply(RunConfig& cfg, const Overrides& o) {
  if (o.input) cfg.input = *o.input;
  if (o.out) cfg.out = *o.out;
  if (o.theta) cfg.theta = *o.theta;
  if (o.seed) cfg.seed = *o.seed;
  if (o.threads) cfg.threads = *o.threads;
  if (o.inject_fault) cfg.inject_fault = true;
}

namespace {

json optional_json(const auto& v) { return v ? json(*v) : json(nullptr); }

json matrix_json(const linalg::Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json config_json(const RunConfig& c) {
  json kernel = {
      {"kind", sim::to_string(c.kernel.kind)},
      {"length_scale", c.kernel.length_scale},
      {"family", dict::to_string(c.kernel.family.kind)},
      {"max_index", c.kernel.family.max_index},
      {"indices", c.kernel.indices},
      {"psi", matrix_json(c.kernel.psi)},
  };
  return {
      {"data", {{"input", c.input.string()}, {"center", c.center}}},
      {"basis",
       {{"family", dict::to_string(c.family)},
        {"max_index", optional_json(c.max_index)},
        {"t_min", optional_json(c.basis_t_min)},
        {"t_max", optional_json(c.basis_t_max)}}},
      {"collection",
       {{"scheme", dict::to_string(c.scheme)},
        {"max_dim", optional_json(c.max_dim)},
        {"subset_size", c.subset_size},
        {"subset_guard", c.subset_guard}}},
      {"selection", {{"theta", c.theta}}},
      {"output", {{"out", c.out.string()}, {"replications_csv", c.replications_csv}}},
      {"run", {{"seed", c.seed}, {"threads", c.threads}, {"reps", c.reps}}},
      {"grid", {{"p", c.grid_p}, {"t_min", c.grid_t_min}, {"t_max", c.grid_t_max}}},
      {"kernel", kernel},
      {"simulate",
       {{"n", c.n}, {"n_grid", c.n_grid}, {"diagnostics", c.diagnostics}, {"alpha", c.alpha}}},
      {"validate", {{"instances", c.validate_instances}, {"inject_fault", c.inject_fault}}},
  };
}

std::size_t default_max_index(dict::BasisKind kind, std::size_t p) {
  return kind == dict::BasisKind::histogram ? std::bit_ceil(p) - 1 : p - 1;
}

dict::BasisFamily resolve_family(const RunConfig& c, double lo, double hi, std::size_t p) {
  dict::BasisFamily f;
  f.kind = c.family;
  f.t_min = c.basis_t_min.value_or(lo);
  f.t_max = c.basis_t_max.value_or(hi);
  if (!c.basis_t_max && f.t_max <= f.t_min) f.t_max = f.t_min + 1.0;
  f.max_index = c.max_index.value_or(default_max_index(f.kind, p));
  return f;
}

dict::CollectionScheme resolve_scheme(const RunConfig& c, const dict::BasisFamily& f) {
  dict::CollectionScheme s;
  s.kind = c.scheme;
  s.max_dim = c.max_dim.value_or(f.size());
  s.subset_size = c.subset_size;
  s.subset_guard = c.subset_guard;
  return s;
}

std::string indices_field(const dict::IndexSet& m) {
  std::string out;
  for (std::size_t k = 0; k < m.size(); ++k) {
    if (k > 0) out += ' ';
    out += std::to_string(m[k]);
  }
  return out;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

template <typename Fn>
int guarded(std::ostream& err, Fn&& body) {
  try {
    return body();
  } catch (const DegenerateCollectionError& e) {
    err << "error: degenerate model collection: " << e.what() << "\n";
    return kDegenerateCollection;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
}

}  // namespace

std::string config_to_json(const RunConfig& cfg) { return dump(config_json(cfg)); }

int cmd_select(const RunConfig& cfg, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    if (cfg.input.empty()) throw InputError("no input file given (use --input or [data] input)");
    auto samples = io::read_samples_csv(cfg.input);
    std::vector<std::string> warnings;
    if (cfg.center) {
      samples = samples.centered();
      warnings.push_back("center=true: column means subtracted; the estimator assumes a centered process");
    }
    const auto& grid = samples.grid();
    const auto family = resolve_family(cfg, grid.front(), grid.back(), samples.p());
    const auto collection = dict::build_collection(family, resolve_scheme(cfg, family), grid);
    warnings.insert(warnings.end(), collection.warnings.begin(), collection.warnings.end());

    const auto s = est::empirical_cov(samples);
    const auto fits = est::fit_all(samples, s, collection.models, cfg.threads);
    const auto report = sel::select(fits, sel::PenaltyConfig{cfg.theta}, samples.n());
    const auto& chosen = fits[report.selected];

    json rows = json::array();
    std::string table = "indices,dim,loss,delta_hat_sq,trace_term,penalty,criterion,selected\n";
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
      const auto& r = report.rows[i];
      rows.push_back({{"indices", r.indices},
                      {"dim", r.dim},
                      {"loss", r.loss},
                      {"delta_hat_sq", r.delta_hat_sq},
                      {"trace_term", fits[i].trace_term},
                      {"penalty", r.penalty},
                      {"criterion", r.criterion}});
      table += indices_field(r.indices) + "," + std::to_string(r.dim) + "," +
               io::format_double(r.loss) + "," + io::format_double(r.delta_hat_sq) + "," +
               io::format_double(fits[i].trace_term) + "," + io::format_double(r.penalty) + "," +
               io::format_double(r.criterion) + "," + (i == report.selected ? "1" : "0") + "\n";
    }
    for (const auto& w : warnings) err << "warning: " << w << "\n";

    json doc = {
        {"config", config_json(cfg)},
        {"n", samples.n()},
        {"p", samples.p()},
        {"grid", grid},
        {"basis",
         {{"family", dict::to_string(family.kind)},
          {"max_index", family.max_index},
          {"t_min", family.t_min},
          {"t_max", family.t_max}}},
        {"penalty", "data_driven"},
        {"theta", report.theta},
        {"selected",
         {{"indices", chosen.model.indices},
          {"dim", chosen.model.dim()},
          {"rank", chosen.model.rank()},
          {"position", report.selected}}},
        {"criterion_table", rows},
        {"delta_sup_sq", report.delta_sup_sq},
        {"ties", report.ties},
        {"warnings", warnings},
    };
    io::write_file(cfg.out / "selection_report.json", dump(doc));
    io::write_file(cfg.out / "sigma_hat.csv", io::matrix_to_csv(grid, chosen.sigma_hat));
    io::write_file(cfg.out / "criterion_table.csv", table);
    log << "selected model " << dict::format_indices(chosen.model.indices) << " (D_m = "
        << chosen.model.dim() << ") among " << fits.size() << " models; reports in "
        << cfg.out.string() << "\n";
    return static_cast<int>(kOk);
  });
}

namespace {

sim::ExperimentConfig experiment_config(const RunConfig& c) {
  if (c.grid_p < 1) throw InputError("grid.p must be >= 1");
  if (!(c.grid_t_min < c.grid_t_max)) throw InputError("grid needs t_min < t_max");
  sim::ExperimentConfig e;
  e.grid = sim::uniform_grid(c.grid_p, c.grid_t_min, c.grid_t_max);
  e.kernel = c.kernel;
  e.kernel.family.t_min = c.grid_t_min;
  e.kernel.family.t_max = c.grid_t_max;
  if (e.kernel.kind == sim::KernelKind::finite_rank) {
    if (e.kernel.indices.empty()) throw InputError("finite_rank kernel needs kernel.indices");
    if (e.kernel.psi.size() == 0) {
      e.kernel.psi = linalg::Matrix::Identity(static_cast<Eigen::Index>(e.kernel.indices.size()),
                                              static_cast<Eigen::Index>(e.kernel.indices.size()));
    }
  }
  e.n = c.n;
  e.n_grid = c.n_grid;
  e.theta = c.theta;
  e.family = resolve_family(c, c.grid_t_min, c.grid_t_max, c.grid_p);
  e.scheme = resolve_scheme(c, e.family);
  e.reps = c.reps;
  e.seed = c.seed;
  e.diagnostics = c.diagnostics;
  e.alpha = c.alpha;
  e.threads = c.threads;
  e.keep_replications = c.replications_csv;
  return e;
}

}  // namespace

int cmd_simulate(const RunConfig& cfg, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    const auto report = sim::run_experiment(experiment_config(cfg));
    for (const auto& w : report.warnings) err << "warning: " << w << "\n";

    json models = json::array();
    for (std::size_t k = 0; k < report.models.size(); ++k) {
      models.push_back({{"indices", report.models[k]}, {"dim", report.model_dims[k]}});
    }
    json studies = json::array();
    std::string risk_csv =
        "n,oracle_model,oracle_dim,oracle_risk,mean_risk,mean_risk_se,risk_ratio,risk_ratio_se,"
        "mean_risk_known,mean_risk_known_se\n";
    std::string freq_csv = "n,indices,dim,count,frequency,count_known,frequency_known\n";
    std::string a1_csv = "n,indices,mean_delta_hat_sq,standard_error,delta_sq,target,z_score,flagged\n";
    std::string a2_csv = "n,alpha,violations,reps,estimate,ci_low,ci_high\n";
    std::string reps_csv = "n,rep,selected,selected_dim,loss,selected_known,loss_known\n";
    const auto reps = static_cast<double>(cfg.reps);

    for (const auto& st : report.studies) {
      json oracle_rows = json::array();
      for (const auto& r : st.oracle.table) {
        oracle_rows.push_back({{"indices", r.indices},
                               {"dim", r.dim},
                               {"bias_sq", r.bias_sq},
                               {"variance_term", r.variance_term},
                               {"risk", r.risk},
                               {"delta_sq", r.delta_sq}});
      }
      json s = {
          {"n", st.n},
          {"oracle",
           {{"model", report.models[st.oracle.best]},
            {"risk", st.oracle.oracle_risk()},
            {"delta_sup_sq", st.oracle.delta_sup_sq()},
            {"table", oracle_rows}}},
          {"mean_risk", st.mean_risk},
          {"mean_risk_se", st.mean_risk_se},
          {"risk_ratio", st.risk_ratio},
          {"risk_ratio_se", st.risk_ratio_se},
          {"mean_risk_known", st.mean_risk_known},
          {"mean_risk_known_se", st.mean_risk_known_se},
          {"selection_counts", st.selection_counts},
          {"selection_counts_known", st.selection_counts_known},
      };
      const auto& best = report.models[st.oracle.best];
      risk_csv += std::to_string(st.n) + "," + indices_field(best) + "," +
                  std::to_string(report.model_dims[st.oracle.best]) + "," +
                  io::format_double(st.oracle.oracle_risk()) + "," + io::format_double(st.mean_risk) +
                  "," + io::format_double(st.mean_risk_se) + "," + io::format_double(st.risk_ratio) +
                  "," + io::format_double(st.risk_ratio_se) + "," +
                  io::format_double(st.mean_risk_known) + "," +
                  io::format_double(st.mean_risk_known_se) + "\n";
      for (std::size_t k = 0; k < report.models.size(); ++k) {
        freq_csv += std::to_string(st.n) + "," + indices_field(report.models[k]) + "," +
                    std::to_string(report.model_dims[k]) + "," +
                    std::to_string(st.selection_counts[k]) + "," +
                    io::format_double(static_cast<double>(st.selection_counts[k]) / reps) + "," +
                    std::to_string(st.selection_counts_known[k]) + "," +
                    io::format_double(static_cast<double>(st.selection_counts_known[k]) / reps) +
                    "\n";
      }
      if (st.a1) {
        json a1 = json::array();
        for (const auto& r : *st.a1) {
          a1.push_back({{"indices", r.indices},
                        {"mean_delta_hat_sq", r.mean_delta_hat_sq},
                        {"standard_error", r.standard_error},
                        {"delta_sq", r.delta_sq},
                        {"target", r.target},
                        {"z_score", r.z_score},
                        {"flagged", r.flagged}});
          a1_csv += std::to_string(st.n) + "," + indices_field(r.indices) + "," +
                    io::format_double(r.mean_delta_hat_sq) + "," +
                    io::format_double(r.standard_error) + "," + io::format_double(r.delta_sq) +
                    "," + io::format_double(r.target) + "," + io::format_double(r.z_score) + "," +
                    (r.flagged ? "1" : "0") + "\n";
        }
        s["a1"] = a1;
      }
      if (st.a2) {
        const auto& b = st.a2->omega_complement;
        s["a2"] = {{"alpha", st.a2->alpha},
                   {"violations", b.successes},
                   {"reps", b.trials},
                   {"estimate", b.estimate},
                   {"ci_low", b.ci_low},
                   {"ci_high", b.ci_high}};
        a2_csv += std::to_string(st.n) + "," + io::format_double(st.a2->alpha) + "," +
                  std::to_string(b.successes) + "," + std::to_string(b.trials) + "," +
                  io::format_double(b.estimate) + "," + io::format_double(b.ci_low) + "," +
                  io::format_double(b.ci_high) + "\n";
      }
      for (const auto& r : st.replications) {
        reps_csv += std::to_string(r.n) + "," + std::to_string(r.rep) + "," +
                    indices_field(report.models[r.selected]) + "," +
                    std::to_string(r.selected_dim) + "," + io::format_double(r.loss) + "," +
                    indices_field(report.models[r.selected_known]) + "," +
                    io::format_double(r.loss_known) + "\n";
      }
      studies.push_back(std::move(s));
    }

    json doc = {
        {"config", config_json(cfg)},
        {"grid", report.config.grid},
        {"sigma", matrix_json(report.sigma)},
        {"sampler_jitter", report.sampler_jitter},
        {"models", models},
        {"c_inf", {{"value", report.c_inf.value}, {"degenerate", report.c_inf.degenerate}}},
        {"studies", studies},
        {"warnings", report.warnings},
    };
    io::write_file(cfg.out / "experiment_report.json", dump(doc));
    io::write_file(cfg.out / "risk_vs_n.csv", risk_csv);
    io::write_file(cfg.out / "selection_frequencies.csv", freq_csv);
    if (cfg.diagnostics) {
      io::write_file(cfg.out / "diagnostics_a1.csv", a1_csv);
      io::write_file(cfg.out / "diagnostics_a2.csv", a2_csv);
    }
    if (cfg.replications_csv) io::write_file(cfg.out / "replications.csv", reps_csv);
    log << "simulated " << report.studies.size() << " sample size(s) x " << cfg.reps
        << " replications; reports in " << cfg.out.string() << "\n";
    return static_cast<int>(kOk);
  });
}

int cmd_validate(const RunConfig& cfg, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    validate::SuiteOptions opts;
    opts.seed = cfg.seed;
    opts.instances = cfg.validate_instances;
    opts.inject_fault = cfg.inject_fault;
    if (opts.instances < 1) throw InputError("validate.instances must be >= 1");
    const auto results = validate::run_suite(opts);

    std::string text;
    bool all = true;
    for (const auto& r : results) {
      text += std::string(r.passed ? "PASS " : "FAIL ") + r.name + "  " + r.detail + "\n";
      all = all && r.passed;
    }
    text += std::string(all ? "all " : "not all ") + std::to_string(results.size()) +
            " checks passed\n";
    log << text;
    io::write_file(cfg.out / "validation_log.txt", text);
    return static_cast<int>(all ? kOk : kValidationFailure);
  });
}

}  // namespace covsel::cli
