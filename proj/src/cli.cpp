#include "liftcert/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "liftcert/certify.hpp"
#include "liftcert/equivalence.hpp"
#include "liftcert/errors.hpp"
#include "liftcert/io.hpp"
#include "liftcert/network.hpp"
#include "liftcert/recovery.hpp"

namespace liftcert {

namespace {

namespace fs = std::filesystem;

/// Output either to a file (atomically) or to the stream.
void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty()) {
    out << content;
  } else {
    write_file_atomic(path, content);
  }
}

/// "0,1;0,2" -> {{0,1},{0,2}}.
std::vector<std::vector<int>> parse_support_list(const std::string& text) {
  std::vector<std::vector<int>> out;
  std::stringstream layers(text);
  std::string layer;
  while (std::getline(layers, layer, ';')) {
    std::vector<int> positions;
    std::stringstream items(layer);
    std::string item;
    while (std::getline(items, item, ',')) {
      std::size_t used = 0;
      int v = 0;
      try {
        v = std::stoi(item, &used);
      } catch (const std::exception&) {
        throw InputError("bad kernel position '" + item + "' in --supports");
      }
      if (used != item.size()) throw InputError("bad kernel position '" + item + "' in --supports");
      positions.push_back(v);
    }
    out.push_back(std::move(positions));
  }
  if (out.empty()) throw InputError("--supports must list at least one layer");
  return out;
}

struct CertifyArgs {
  std::string topology, family, out, csv;
  std::optional<int> max_support_size;
  int jobs = 1;
  std::optional<double> converse_C;
};

int cmd_certify(const CertifyArgs& a, std::ostream& out) {
  const std::string topo_bytes = read_file(a.topology);
  const NetworkTopology topo = validate_topology(parse_topology(topo_bytes, a.topology));
  CertificateInputs inputs;
  inputs.topology_path = a.topology;
  inputs.topology_sha256 = sha256_hex(topo_bytes);
  std::optional<SupportFamily> family;
  if (!a.family.empty()) {
    const std::string bytes = read_file(a.family);
    family = parse_family(bytes, a.family);
    inputs.family_path = a.family;
    inputs.family_sha256 = sha256_hex(bytes);
  } else {
    family = SupportFamily::all_of_size_at_most(topo.K(), topo.S(), *a.max_support_size);
    inputs.generator_max_size = a.max_support_size;
  }
  CertifyOptions opts;
  opts.jobs = a.jobs;
  opts.converse_C = a.converse_C;
  const CertificationReport report = certify(topo, *family, opts);
  emit(a.out, certificate_to_json(report, topo, inputs), out);
  if (!a.csv.empty()) write_file_atomic(a.csv, pair_table_csv(report));
  return report.all_checks_pass() ? kExitOk : kExitCheckFailed;
}

struct DistArgs {
  std::string a, b, p = "2", topology;
};

int cmd_dist(const DistArgs& d, std::ostream& out) {
  const ParamTuple A = parse_params(read_file(d.a), d.a);
  const ParamTuple B = parse_params(read_file(d.b), d.b);
  const NormOrder p = NormOrder::parse(d.p);
  nlohmann::json j;
  j["p"] = p.is_inf() ? nlohmann::json("inf") : nlohmann::json(p.value());
  j["dp"] = dp_dist(A, B, p);
  if (!d.topology.empty()) {
    const NetworkTopology topo = load_topology(d.topology);
    j["networkDist"] = network_dist(A, B, p, topo);
  }
  out << j.dump(2) << "\n";
  return kExitOk;
}

struct ExperimentArgs {
  std::string config, out, summary;
  std::optional<int> jobs;
};

int cmd_experiment(const ExperimentArgs& e, std::ostream& out) {
  const fs::path path(e.config);
  ExperimentConfig cfg =
      parse_experiment_config(read_file(path), path.parent_path(), path.string());
  if (e.jobs) cfg.jobs = *e.jobs;
  const ExperimentResult res = run_experiment(cfg);
  emit(e.out, experiment_csv(res), out);
  if (!e.summary.empty()) write_file_atomic(e.summary, experiment_summary_json(res, cfg));
  return res.violation ? kExitCheckFailed : kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lifting-based stability certificates for sparse convolutional linear networks",
               std::string(kToolName)};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  CertifyArgs ca;
  auto* certify_cmd = app.add_subcommand("certify", "Certify a topology against a support family");
  certify_cmd->add_option("--topology", ca.topology, "Topology JSON")->required();
  auto* fam = certify_cmd->add_option("--family", ca.family, "Support-family JSON");
  auto* gen_fam = certify_cmd->add_option("--max-support-size", ca.max_support_size,
                                          "Use all supports with 1..s slots per layer");
  fam->excludes(gen_fam);
  certify_cmd->add_option("--out", ca.out, "Certificate JSON path (default stdout)");
  certify_cmd->add_option("--csv", ca.csv, "Per-pair CSV path");
  certify_cmd->add_option("--jobs", ca.jobs, "Worker threads")->check(CLI::PositiveNumber);
  certify_cmd->add_option("--converse-C", ca.converse_C, "Constant C of the converse bound")
      ->check(CLI::PositiveNumber);

  DistArgs da;
  auto* dist_cmd = app.add_subcommand("dist", "Quotient and network distances of two tuples");
  dist_cmd->add_option("A", da.a, "Params JSON")->required();
  dist_cmd->add_option("B", da.b, "Params JSON")->required();
  dist_cmd->add_option("--p", da.p, "Norm order (number >= 1 or inf)");
  dist_cmd->add_option("--topology", da.topology, "Topology JSON for the network distance");

  ExperimentArgs ea;
  auto* exp_cmd = app.add_subcommand("experiment", "Run a seeded recovery sweep");
  exp_cmd->add_option("config", ea.config, "Experiment config JSON")->required();
  exp_cmd->add_option("--out", ea.out, "Per-trial CSV path (default stdout)");
  exp_cmd->add_option("--summary", ea.summary, "Summary JSON path");
  exp_cmd->add_option("--jobs", ea.jobs, "Worker threads")->check(CLI::PositiveNumber);

  auto* gen_cmd = app.add_subcommand("gen", "Emit a canonical topology");
  gen_cmd->require_subcommand(1);
  std::string gen_out;
  int haar_K = 0, haar_N = 0;
  auto* haar_cmd = gen_cmd->add_subcommand("haar", "Haar binary tree");
  haar_cmd->add_option("K", haar_K, "Depth")->required();
  haar_cmd->add_option("N", haar_N, "Signal length")->required();
  haar_cmd->add_option("--out", gen_out, "Topology JSON path (default stdout)");
  int sp_N = 0;
  std::string sp_supports;
  auto* sp_cmd = gen_cmd->add_subcommand("single-path", "Chain network");
  sp_cmd->add_option("--N", sp_N, "Signal length")->required();
  sp_cmd->add_option("--supports", sp_supports, "Per-depth supports, e.g. \"0,1;0,2\"")
      ->required();
  sp_cmd->add_option("--out", gen_out, "Topology JSON path (default stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*certify_cmd) {
      if (ca.family.empty() && !ca.max_support_size) {
        err << "error: certify needs --family or --max-support-size\n";
        return kExitInvalid;
      }
      return cmd_certify(ca, out);
    }
    if (*dist_cmd) return cmd_dist(da, out);
    if (*exp_cmd) return cmd_experiment(ea, out);
    if (*haar_cmd) {
      emit(gen_out, topology_to_json(haar_topology(haar_K, haar_N)), out);
      return kExitOk;
    }
    if (*sp_cmd) {
      emit(gen_out, topology_to_json(single_path_topology(sp_N, parse_support_list(sp_supports))),
           out);
      return kExitOk;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitInvalid;
}

}  // namespace liftcert
