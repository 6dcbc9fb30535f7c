#include "liftcert/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>
#include <openssl/evp.h>

#include "liftcert/errors.hpp"
#include "liftcert/lifting.hpp"
#include "liftcert/spectral.hpp"

namespace liftcert {

using nlohmann::json;

namespace {

json parse_json(std::string_view text, std::string_view origin) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // byte is 1-based and points one past the offending character.
    std::size_t line = 1, column = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw InputError(std::string(origin) + ": line " + std::to_string(line) + ", column " +
                     std::to_string(column) + ": malformed JSON");
  }
}

[[noreturn]] void fail(std::string_view origin, const std::string& what) {
  throw InputError(std::string(origin) + ": " + what);
}

const json& require(const json& j, const char* key, std::string_view origin) {
  if (!j.is_object()) fail(origin, "expected a JSON object");
  auto it = j.find(key);
  if (it == j.end()) fail(origin, std::string("missing field \"") + key + "\"");
  return *it;
}

int as_int(const json& j, const char* key, std::string_view origin) {
  if (!j.is_number_integer()) fail(origin, std::string("field \"") + key + "\" must be an integer");
  const auto v = j.get<long long>();
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    fail(origin, std::string("field \"") + key + "\" is out of range");
  }
  return static_cast<int>(v);
}

double as_double(const json& j, const char* key, std::string_view origin) {
  if (!j.is_number()) fail(origin, std::string("field \"") + key + "\" must be a number");
  return j.get<double>();
}

std::string as_string(const json& j, const char* key, std::string_view origin) {
  if (!j.is_string()) fail(origin, std::string("field \"") + key + "\" must be a string");
  return j.get<std::string>();
}

std::vector<int> as_int_list(const json& j, const char* key, std::string_view origin) {
  if (!j.is_array()) fail(origin, std::string("field \"") + key + "\" must be an array");
  std::vector<int> out;
  for (const auto& v : j) out.push_back(as_int(v, key, origin));
  return out;
}

NormOrder parse_norm(const json& j, std::string_view origin) {
  try {
    if (j.is_string()) return NormOrder::parse(j.get<std::string>());
    return NormOrder(as_double(j, "p", origin));
  } catch (const std::invalid_argument& e) {
    fail(origin, std::string("field \"p\": ") + e.what());
  }
}

json number_or_inf(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

template <typename T>
json optional_number(const std::optional<T>& v) {
  return v ? number_or_inf(static_cast<double>(*v)) : json(nullptr);
}

RawTopology raw_from_json(const json& j, std::string_view origin) {
  RawTopology raw;
  raw.N = as_int(require(j, "N", origin), "N", origin);
  if (j.contains("S")) raw.S = as_int(j.at("S"), "S", origin);
  const json& nodes = require(j, "nodes", origin);
  if (!nodes.is_array()) fail(origin, "field \"nodes\" must be an array");
  for (const auto& n : nodes) raw.nodes.push_back(as_string(n, "nodes", origin));
  raw.root = as_string(require(j, "root", origin), "root", origin);
  const json& leaves = require(j, "leaves", origin);
  if (!leaves.is_array()) fail(origin, "field \"leaves\" must be an array");
  for (const auto& n : leaves) raw.leaves.push_back(as_string(n, "leaves", origin));
  const json& edges = require(j, "edges", origin);
  if (!edges.is_array()) fail(origin, "field \"edges\" must be an array");
  for (const auto& e : edges) {
    raw.edges.push_back({as_string(require(e, "from", origin), "from", origin),
                         as_string(require(e, "to", origin), "to", origin),
                         as_int_list(require(e, "support", origin), "support", origin)});
  }
  return raw;
}

SupportFamily family_from_json(const json& j, std::string_view origin) {
  const int K = as_int(require(j, "K", origin), "K", origin);
  const int S = as_int(require(j, "S", origin), "S", origin);
  const json& list = require(j, "supports", origin);
  if (!list.is_array() || list.empty()) fail(origin, "field \"supports\" must be a nonempty array");
  std::vector<Support> members;
  try {
    for (const auto& s : list) {
      if (!s.is_array() || static_cast<int>(s.size()) != K) {
        fail(origin, "every support must list K = " + std::to_string(K) + " layers");
      }
      std::vector<std::vector<int>> layers;
      for (const auto& layer : s) layers.push_back(as_int_list(layer, "supports", origin));
      members.emplace_back(S, std::move(layers));
    }
    return SupportFamily(std::move(members));
  } catch (const InputError&) {
    throw;
  } catch (const std::exception& e) {
    fail(origin, e.what());
  }
}

json family_json(const SupportFamily& f) {
  json supports = json::array();
  for (const auto& s : f.members()) supports.push_back(s.layers());
  return json{{"K", f.K()}, {"S", f.S()}, {"supports", supports}};
}

json raw_to_json(const RawTopology& raw) {
  json edges = json::array();
  for (const auto& e : raw.edges) {
    edges.push_back(json{{"from", e.from}, {"to", e.to}, {"support", e.support}});
  }
  json j{{"N", raw.N},          {"nodes", raw.nodes}, {"root", raw.root},
         {"leaves", raw.leaves}, {"edges", edges}};
  if (raw.S) j["S"] = *raw.S;
  return j;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw InputError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw InputError("cannot move output into " + path.string());
  }
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

RawTopology parse_topology(std::string_view text, std::string_view origin) {
  return raw_from_json(parse_json(text, origin), origin);
}

NetworkTopology load_topology(const std::filesystem::path& path) {
  return validate_topology(parse_topology(read_file(path), path.string()));
}

std::string topology_to_json(const NetworkTopology& topo) { return dump(raw_to_json(topo.raw())); }

SupportFamily parse_family(std::string_view text, std::string_view origin) {
  return family_from_json(parse_json(text, origin), origin);
}

std::string family_to_json(const SupportFamily& family) { return dump(family_json(family)); }

ParamTuple parse_params(std::string_view text, std::string_view origin) {
  const json j = parse_json(text, origin);
  const int K = as_int(require(j, "K", origin), "K", origin);
  const int S = as_int(require(j, "S", origin), "S", origin);
  const json& factors = require(j, "factors", origin);
  if (!factors.is_array() || static_cast<int>(factors.size()) != K) {
    fail(origin, "field \"factors\" must hold K = " + std::to_string(K) + " vectors");
  }
  std::vector<std::vector<double>> f;
  for (const auto& row : factors) {
    if (!row.is_array() || static_cast<int>(row.size()) != S) {
      fail(origin, "every factor must hold S = " + std::to_string(S) + " numbers");
    }
    std::vector<double> v;
    for (const auto& x : row) v.push_back(as_double(x, "factors", origin));
    f.push_back(std::move(v));
  }
  try {
    return ParamTuple(std::move(f));
  } catch (const std::exception& e) {
    fail(origin, e.what());
  }
}

std::string params_to_json(const ParamTuple& h) {
  return dump(json{{"K", h.K()}, {"S", h.S()}, {"factors", h.factors()}});
}

ExperimentConfig parse_experiment_config(std::string_view text,
                                         const std::filesystem::path& base_dir,
                                         std::string_view origin) {
  const json j = parse_json(text, origin);
  ExperimentConfig cfg;
  try {
    const json& t = require(j, "topology", origin);
    if (t.is_string()) {
      cfg.topology = load_topology(base_dir / t.get<std::string>());
    } else {
      cfg.topology = validate_topology(raw_from_json(t, origin));
    }
    if (j.contains("family")) {
      const json& f = j.at("family");
      if (f.is_string()) {
        const auto path = base_dir / f.get<std::string>();
        cfg.family = parse_family(read_file(path), path.string());
      } else if (f.is_object() && f.contains("maxSize")) {
        cfg.family = SupportFamily::all_of_size_at_most(
            cfg.topology.K(), cfg.topology.S(), as_int(f.at("maxSize"), "maxSize", origin));
      } else {
        cfg.family = family_from_json(f, origin);
      }
    }
  } catch (const InputError&) {
    throw;
  } catch (const std::exception& e) {
    fail(origin, e.what());
  }
  const json& grid = require(j, "deltaGrid", origin);
  if (!grid.is_array()) fail(origin, "field \"deltaGrid\" must be an array");
  for (const auto& d : grid) cfg.delta_grid.push_back(as_double(d, "deltaGrid", origin));
  cfg.trials = as_int(require(j, "trials", origin), "trials", origin);
  cfg.p = parse_norm(require(j, "p", origin), origin);
  const json& s = require(j, "solver", origin);
  cfg.solver.max_iters = as_int(require(s, "maxIters", origin), "maxIters", origin);
  cfg.solver.tol = as_double(require(s, "tol", origin), "tol", origin);
  cfg.solver.restarts = as_int(require(s, "restarts", origin), "restarts", origin);
  const json& seed = require(j, "seed", origin);
  if (!seed.is_number_integer() || (seed.is_number_integer() && !seed.is_number_unsigned() &&
                                    seed.get<long long>() < 0)) {
    fail(origin, "field \"seed\" must be a nonnegative integer");
  }
  cfg.seed = seed.get<std::uint64_t>();
  if (j.contains("mode")) {
    const std::string mode = as_string(j.at("mode"), "mode", origin);
    if (mode == "oracle") {
      cfg.mode = ExperimentMode::Oracle;
    } else if (mode == "search") {
      cfg.mode = ExperimentMode::Search;
    } else {
      fail(origin, "field \"mode\" must be \"oracle\" or \"search\"");
    }
  }
  if (j.contains("corrupt")) {
    if (!j.at("corrupt").is_boolean()) fail(origin, "field \"corrupt\" must be a boolean");
    cfg.corrupt = j.at("corrupt").get<bool>();
  }
  if (j.contains("jobs")) cfg.jobs = as_int(j.at("jobs"), "jobs", origin);
  if (cfg.trials < 1) fail(origin, "field \"trials\" must be >= 1");
  if (cfg.delta_grid.empty()) fail(origin, "field \"deltaGrid\" must be nonempty");
  for (double d : cfg.delta_grid) {
    if (!(d >= 0.0)) fail(origin, "deltaGrid entries must be >= 0");
  }
  if (cfg.solver.max_iters < 1 || cfg.solver.restarts < 1 || !(cfg.solver.tol >= 0.0)) {
    fail(origin, "solver needs maxIters >= 1, restarts >= 1, tol >= 0");
  }
  return cfg;
}

std::string certificate_to_json(const CertificationReport& r, const NetworkTopology& topo,
                                const CertificateInputs& inputs) {
  json j;
  j["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
  json in;
  in["topology"] = {{"path", inputs.topology_path}, {"sha256", inputs.topology_sha256}};
  if (inputs.family_path) {
    in["family"] = {{"path", *inputs.family_path}, {"sha256", *inputs.family_sha256}};
  } else if (inputs.generator_max_size) {
    in["family"] = {{"generator", "allOfSizeAtMost"}, {"maxSize", *inputs.generator_max_size}};
  }
  j["inputs"] = in;
  j["network"] = {{"N", topo.N()},
                  {"K", topo.K()},
                  {"S", topo.S()},
                  {"paths", topo.paths().size()},
                  {"leaves", topo.leaves().size()}};
  j["familySize"] = r.family_size;
  j["tolerances"] = {{"rankRelTol", kRankRelTol},
                     {"rankGapFactor", kRankGapFactor},
                     {"binaryEntryTol", kBinaryEntryTol},
                     {"kernelVanishTol", kKernelVanishTol}};

  json ident = {{"pass", r.identifiable.pass}, {"pairsChecked", r.identifiable.pairs_checked}};
  if (r.identifiable.witness) {
    const auto& w = *r.identifiable.witness;
    ident["witness"] = {{"memberA", w.member_a},
                        {"memberB", w.member_b},
                        {"leaf", topo.node_names()[topo.leaves()[w.leaf]]},
                        {"row", w.row},
                        {"column", w.column},
                        {"value", w.value}};
  } else {
    ident["witness"] = nullptr;
  }
  j["identifiable"] = ident;

  json disj = {{"pass", r.disjointness.pass}};
  if (!r.disjointness.pass) {
    disj["witness"] = {{"pathA", r.disjointness.path_a},
                       {"pathB", r.disjointness.path_b},
                       {"row", r.disjointness.row},
                       {"column", r.disjointness.column}};
  }
  j["pathSupportsDisjoint"] = disj;

  json nsp_pairs = json::array();
  for (const auto& p : r.nsp.per_pair) {
    nsp_pairs.push_back(
        {{"pair", p.pair_index}, {"pass", p.pass}, {"indeterminate", p.indeterminate}});
  }
  j["nspSufficient"] = {{"allPass", r.nsp.all_pass}, {"perPair", nsp_pairs}};
  j["singlePath"] = {{"applicable", r.single_path.applicable},
                     {"sigma", r.single_path.applicable ? json(r.single_path.sigma) : json(nullptr)},
                     {"reason", r.single_path.reason}};
  j["gamma"] = optional_number(r.gamma);
  j["rho"] = optional_number(r.rho);
  j["sigmaFamily"] = r.sigma_error ? json(nullptr) : json(r.sigma_family);
  j["sigmaError"] = r.sigma_error ? json(*r.sigma_error) : json(nullptr);
  j["sigmaMax"] = r.sigma_max;
  if (r.converse_gamma) {
    j["converse"] = {{"gamma", *r.converse_gamma}, {"rho", "delta"}};
  } else {
    j["converse"] = nullptr;
  }

  json pairs = json::array();
  for (const auto& p : r.per_pair) {
    pairs.push_back({{"pair", p.pair_index},
                     {"memberA", p.member_a},
                     {"memberB", p.member_b},
                     {"union", p.union_support.layers()},
                     {"cubeColumns", p.cube_columns},
                     {"sigmaMinNonzero", p.summary.sigma_min_nonzero},
                     {"sigmaMax", p.summary.sigma_max},
                     {"rank", p.summary.rank},
                     {"indeterminate", p.summary.indeterminate}});
  }
  j["perPair"] = pairs;

  json kernel = json::array();
  for (const auto& k : r.kernel) {
    kernel.push_back({{"pair", k.pair_index},
                      {"expectedDim", k.check.expected_dim},
                      {"observedDim", k.check.observed_dim},
                      {"validIndices", k.check.valid_indices},
                      {"maxOnValid", k.check.max_on_valid},
                      {"indeterminate", k.check.indeterminate},
                      {"pass", k.check.pass}});
  }
  j["kernelCharacterization"] = kernel;
  j["allChecksPass"] = r.all_checks_pass();
  j["notes"] = json::array(
      {"A passing identifiability test is a necessary condition only; a failing one proves "
       "non-identifiability.",
       "gamma and rho are certified only by full column rank of every restricted operator or by "
       "the single-path closed form; otherwise they are null.",
       "The converse gamma = C S^((K-1)/2) sqrt(K) sigmaMax with rho = delta holds only if stable "
       "recovery holds for all instances; that hypothesis is not tested here."});
  return dump(j);
}

std::string pair_table_csv(const CertificationReport& r) {
  std::ostringstream os;
  os << "pair_index,sigma_min_nonzero,rank,indeterminate\n";
  char buf[40];
  for (const auto& p : r.per_pair) {
    std::snprintf(buf, sizeof buf, "%.17g", p.summary.sigma_min_nonzero);
    os << p.pair_index << ',' << buf << ',' << p.summary.rank << ','
       << int(p.summary.indeterminate) << '\n';
  }
  return os.str();
}

std::string experiment_summary_json(const ExperimentResult& res, const ExperimentConfig& cfg) {
  auto bound = [](const BoundTally& t) {
    return json{{"preconditionMet", t.precondition_met},
                {"satisfied", t.satisfied},
                {"satisfactionRate",
                 t.precondition_met ? json(double(t.satisfied) / t.precondition_met)
                                    : json(nullptr)},
                {"maxLhsOverRhs", t.max_ratio}};
  };
  json j;
  j["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
  j["trials"] = res.trials.size();
  j["deltaGrid"] = cfg.delta_grid;
  j["p"] = number_or_inf(cfg.p.value());
  j["seed"] = cfg.seed;
  j["mode"] = cfg.mode == ExperimentMode::Oracle ? "oracle" : "search";
  j["corrupt"] = cfg.corrupt;
  j["solver"] = {{"maxIters", cfg.solver.max_iters},
                 {"tol", cfg.solver.tol},
                 {"restarts", cfg.solver.restarts}};
  j["constants"] = {{"identifiable", res.constants.identifiable},
                    {"gamma", optional_number(res.constants.gamma)},
                    {"rho", optional_number(res.constants.rho)},
                    {"sigma", optional_number(res.constants.sigma)}};
  j["tensorBound"] = bound(res.t3_tensor);
  j["quotientBound"] = bound(res.t3_dp);
  j["networkBound"] = bound(res.t7);
  j["errors"] = res.errors;
  j["etaAboveDelta"] = res.eta_above_delta;
  j["maxEta"] = res.max_eta;
  j["meanEta"] = res.mean_eta;
  j["maxNetworkDistNoiseless"] = res.max_network_dist_noiseless;
  j["violation"] = res.violation;
  return dump(j);
}

}  // namespace liftcert
