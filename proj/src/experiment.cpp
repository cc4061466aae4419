#include "embz/experiment.hpp"

#include <sys/file.h>
#include <unistd.h>

#include <openssl/evp.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fcntl.h>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "embz/errors.hpp"

namespace embz::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::set<std::string> kFamilyKeys{"family", "lambda", "lambdas", "n", "sites", "L", "gamma", "h"};
const std::set<std::string> kStudyKeys{"d_list", "size_list", "K_schedule", "tail_cap"};

std::set<std::string> allowed_keys(const std::string& experiment) {
  std::set<std::string> keys{"experiment", "seed", "output_path"};
  if (experiment == "oracle-certify") {
    keys.insert({"instances", "tol"});
    return keys;
  }
  keys.insert(kStudyKeys.begin(), kStudyKeys.end());
  keys.insert(kFamilyKeys.begin(), kFamilyKeys.end());
  if (experiment == "kappa-convergence") keys.insert("search");
  return keys;
}

const json& require(const json& j, const std::string& key) {
  if (!j.contains(key)) throw ConfigError("missing required key '" + key + "'");
  return j.at(key);
}

double as_real(const json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError("'" + key + "' must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError("'" + key + "' must be finite");
  return x;
}

std::uint64_t as_count(const json& v, const std::string& key) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  throw ConfigError("'" + key + "' must be a nonnegative integer");
}

template <class T>
std::vector<T> as_increasing_list(const json& v, const std::string& key, std::uint64_t min_value) {
  if (!v.is_array() || v.empty()) throw ConfigError("'" + key + "' must be a nonempty list");
  std::vector<T> out;
  for (const json& e : v) {
    const std::uint64_t x = as_count(e, key);
    if (x < min_value) throw ConfigError("'" + key + "' entries must be >= " + std::to_string(min_value));
    if (x > static_cast<std::uint64_t>(std::numeric_limits<T>::max())) throw ConfigError("'" + key + "' entry too large");
    if (!out.empty() && static_cast<std::uint64_t>(out.back()) >= x) {
      throw ConfigError("'" + key + "' must be strictly increasing");
    }
    out.push_back(static_cast<T>(x));
  }
  return out;
}

// Family template plus the size implied by its own size key, if any.
std::pair<EmbezzlerFamily, std::optional<std::uint64_t>> parse_family(const json& j, const std::string& name) {
  auto reject_other = [&](std::set<std::string> allowed) {
    allowed.insert("family");
    for (const auto& key : kFamilyKeys) {
      if (j.contains(key) && !allowed.contains(key)) {
        throw ConfigError("key '" + key + "' does not apply to family '" + name + "'");
      }
    }
  };
  auto size_key = [&](const char* key) -> std::optional<std::uint64_t> {
    if (!j.contains(key)) return std::nullopt;
    return as_count(j.at(key), key);
  };
  if (name == "vdh") {
    reject_other({"n"});
    const auto n = size_key("n");
    return {VanDamHayden{n.value_or(2)}, n};
  }
  if (name == "geometric") {
    reject_other({"lambda", "sites"});
    const auto sites = size_key("sites");
    return {Geometric{as_real(require(j, "lambda"), "lambda"), static_cast<unsigned>(sites.value_or(1))}, sites};
  }
  if (name == "araki-woods") {
    reject_other({"lambdas"});
    const json& list = require(j, "lambdas");
    if (!list.is_array() || list.empty()) throw ConfigError("'lambdas' must be a nonempty list");
    ArakiWoods aw;
    for (const json& e : list) aw.lambdas.push_back(as_real(e, "lambdas"));
    return {aw, std::nullopt};
  }
  if (name == "xy") {
    reject_other({"L", "gamma", "h"});
    const auto L = size_key("L");
    XYChain xy{static_cast<unsigned>(L.value_or(2)), 0.0, 0.0};
    if (j.contains("gamma")) xy.gamma = as_real(j.at("gamma"), "gamma");
    if (j.contains("h")) xy.h = as_real(j.at("h"), "h");
    return {xy, L};
  }
  throw ConfigError("unknown family '" + name + "' (expected vdh, geometric, araki-woods or xy)");
}

std::vector<std::uint64_t> default_sizes(const std::string& experiment, const EmbezzlerFamily& family) {
  const std::string name = family_name(family);
  if (experiment == "vdh-table") {
    std::vector<std::uint64_t> out;
    for (unsigned e = 2; e <= 12; ++e) out.push_back(std::uint64_t{1} << e);
    return out;
  }
  if (name == "araki-woods") return {std::get<ArakiWoods>(family).lambdas.size()};
  if (experiment == "witness") {
    if (name == "vdh") return {2, 4, 8};
    if (name == "geometric") return {1, 2, 3};
    return {2, 4};
  }
  if (name == "geometric") {
    std::vector<std::uint64_t> out;
    for (std::uint64_t m = 4; m <= 28; m += 2) out.push_back(m);
    return out;
  }
  if (name == "vdh") return {16, 256, 4096};
  return {20, 50, 100, 200};
}

std::vector<unsigned> default_d_list(const std::string& experiment) {
  if (experiment == "vdh-table") return {2, 4, 8, 16};
  if (experiment == "kappa-convergence") return {2, 3, 4};
  if (experiment == "xx-chain") return {2};
  return {16, 32, 64};
}

std::vector<std::size_t> default_k_schedule(const std::string& experiment) {
  if (experiment == "kappa-convergence") return {std::size_t{1} << 17};
  if (experiment == "xx-chain") return {std::size_t{1} << 20};
  return {std::size_t{1} << 16};
}

SearchConfig parse_search(const json& j) {
  if (!j.is_object()) throw ConfigError("'search' must be an object");
  SearchConfig s;
  for (const auto& [key, v] : j.items()) {
    if (key == "mesh") {
      s.mesh = static_cast<unsigned>(as_count(v, key));
      if (s.mesh < 1) throw ConfigError("'search.mesh' must be >= 1");
    } else if (key == "max_grid_points") {
      s.max_grid_points = as_count(v, key);
    } else if (key == "min_step") {
      s.min_step = as_real(v, key);
      if (!(s.min_step > 0.0)) throw ConfigError("'search.min_step' must be > 0");
    } else if (key == "refine_starts") {
      s.refine_starts = static_cast<unsigned>(as_count(v, key));
    } else if (key == "random_starts") {
      s.random_starts = static_cast<unsigned>(as_count(v, key));
    } else if (key == "max_evals") {
      s.max_evals = as_count(v, key);
    } else {
      throw ConfigError("unknown key 'search." + key + "'");
    }
  }
  return s;
}

json family_json(const EmbezzlerFamily& family) {
  return std::visit(
      [](const auto& f) -> json {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, VanDamHayden>) {
          return json{{"family", "vdh"}};
        } else if constexpr (std::is_same_v<F, Geometric>) {
          return json{{"family", "geometric"}, {"lambda", f.lambda}};
        } else if constexpr (std::is_same_v<F, ArakiWoods>) {
          return json{{"family", "araki-woods"}, {"lambdas", f.lambdas}};
        } else {
          return json{{"family", "xy"}, {"gamma", f.gamma}, {"h", f.h}};
        }
      },
      family);
}

std::optional<double> reference_value(const EmbezzlerFamily& family) {
  if (const auto* g = std::get_if<Geometric>(&family)) return type_iii_kappa_max(g->lambda);
  if (const auto* aw = std::get_if<ArakiWoods>(&family)) {
    const auto& l = aw->lambdas;
    if (std::all_of(l.begin(), l.end(), [&](double x) { return x == l.front(); })) return type_iii_kappa_max(l.front());
  }
  return std::nullopt;
}

ResultRow from_study(const StudyRow& s) {
  ResultRow r;
  r.size = s.size;
  r.d = s.d;
  r.value = s.value;
  r.argmax_phi = s.argmax_phi;
  r.argmax_psi = s.argmax_psi;
  r.truncation_K = s.truncation_K;
  r.search_evals = s.search_evals;
  r.runtime_ms = s.runtime_ms;
  r.nonmonotone = s.nonmonotone;
  return r;
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ';';
    out += format_double(v[i]);
  }
  return out;
}

void write_text(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + tmp.string() + " for writing");
    f << content;
    f.flush();
    if (!f) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

class DirectoryLock {
 public:
  explicit DirectoryLock(const fs::path& dir) {
    const fs::path file = dir / ".embz.lock";
    fd_ = ::open(file.c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0644);
    if (fd_ < 0) throw IoError("cannot open lock file " + file.string() + ": " + std::strerror(errno));
    if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
      ::close(fd_);
      throw IoError("another experiment holds the lock on " + dir.string());
    }
  }
  ~DirectoryLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  int fd_ = -1;
};

bool has_bound_column(const std::string& experiment) { return experiment == "vdh-table" || experiment == "witness"; }

}  // namespace

ExperimentConfig parse_config(const json& j, const std::optional<std::string>& experiment) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig c;
  if (j.contains("experiment")) {
    if (!j.at("experiment").is_string()) throw ConfigError("'experiment' must be a string");
    c.experiment = j.at("experiment").get<std::string>();
    if (experiment && *experiment != c.experiment) {
      throw ConfigError("config experiment '" + c.experiment + "' does not match subcommand '" + *experiment + "'");
    }
  } else if (experiment) {
    c.experiment = *experiment;
  } else {
    throw ConfigError("missing required key 'experiment'");
  }
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), c.experiment) == names.end()) {
    throw ConfigError("unknown experiment '" + c.experiment + "'");
  }
  const std::set<std::string> allowed = allowed_keys(c.experiment);
  for (const auto& [key, _] : j.items()) {
    if (!allowed.contains(key)) throw ConfigError("unknown key '" + key + "' for experiment " + c.experiment);
  }

  if (j.contains("seed")) c.seed = as_count(j.at("seed"), "seed");
  if (j.contains("output_path")) {
    if (!j.at("output_path").is_string()) throw ConfigError("'output_path' must be a string");
    c.output_path = j.at("output_path").get<std::string>();
  }

  if (c.experiment == "oracle-certify") {
    if (j.contains("instances")) {
      const json& inst = j.at("instances");
      if (!inst.is_object()) throw ConfigError("'instances' must be an object");
      for (const auto& [key, v] : inst.items()) {
        const std::uint64_t n = as_count(v, "instances." + key);
        if (n < 1) throw ConfigError("'instances." + key + "' must be >= 1");
        if (key == "pure") {
          c.instances.pure = n;
        } else if (key == "mixed") {
          c.instances.mixed = n;
        } else if (key == "implication") {
          c.instances.implication = n;
        } else {
          throw ConfigError("unknown key 'instances." + key + "'");
        }
      }
    }
    if (j.contains("tol")) {
      c.tol = as_real(j.at("tol"), "tol");
      if (!(c.tol > 0.0)) throw ConfigError("'tol' must be > 0");
    }
    return c;
  }

  std::string family = "geometric";
  if (c.experiment == "vdh-table" || c.experiment == "witness") family = "vdh";
  if (c.experiment == "xx-chain") family = "xy";
  if (j.contains("family")) {
    if (!j.at("family").is_string()) throw ConfigError("'family' must be a string");
    const std::string given = j.at("family").get<std::string>();
    if ((c.experiment == "vdh-table" || c.experiment == "xx-chain") && given != family) {
      throw ConfigError(c.experiment + " requires family '" + family + "'");
    }
    family = given;
  }
  auto [tmpl, own_size] = parse_family(j, family);
  c.family = tmpl;

  if (j.contains("size_list")) {
    c.size_list = as_increasing_list<std::uint64_t>(j.at("size_list"), "size_list", 1);
    if (own_size) throw ConfigError("give either size_list or the family size key, not both");
  } else if (own_size) {
    c.size_list = {*own_size};
  } else {
    c.size_list = default_sizes(c.experiment, tmpl);
  }
  c.d_list = j.contains("d_list") ? as_increasing_list<unsigned>(j.at("d_list"), "d_list", 2)
                                  : default_d_list(c.experiment);
  c.k_schedule = j.contains("K_schedule") ? as_increasing_list<std::size_t>(j.at("K_schedule"), "K_schedule", 1)
                                          : default_k_schedule(c.experiment);
  if (j.contains("tail_cap")) c.tail_cap = as_real(j.at("tail_cap"), "tail_cap");
  if (!(c.tail_cap > 0.0 && c.tail_cap <= 0.1)) throw ConfigError("'tail_cap' must lie in (0, 0.1]");
  if (j.contains("search")) c.search = parse_search(j.at("search"));
  c.search.seed = c.seed;

  for (std::uint64_t size : c.size_list) validate(with_size(*c.family, size));
  return c;
}

json canonical_json(const ExperimentConfig& c) {
  json j{{"experiment", c.experiment}, {"seed", c.seed}};
  if (c.experiment == "oracle-certify") {
    j["instances"] = {{"pure", c.instances.pure}, {"mixed", c.instances.mixed}, {"implication", c.instances.implication}};
    j["tol"] = c.tol;
    return j;
  }
  j.update(family_json(*c.family));
  j["d_list"] = c.d_list;
  j["size_list"] = c.size_list;
  j["K_schedule"] = c.k_schedule;
  j["tail_cap"] = c.tail_cap;
  if (c.experiment == "kappa-convergence") {
    j["search"] = {{"mesh", c.search.mesh},
                   {"max_grid_points", c.search.max_grid_points},
                   {"min_step", c.search.min_step},
                   {"refine_starts", c.search.refine_starts},
                   {"random_starts", c.search.random_starts},
                   {"max_evals", c.search.max_evals}};
  }
  return j;
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw NumericError("SHA-256 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

std::string config_hash(const ExperimentConfig& config) {
  return sha256_hex(canonical_json(config).dump() + "\n" + kVersion);
}

bool ResultRecord::passed() const {
  return std::all_of(reports.begin(), reports.end(), [](const oracle::OracleReport& r) { return r.pass; });
}

void to_json(json& j, const ResultRecord& r) {
  json rows = json::array();
  for (const ResultRow& row : r.rows) {
    json e{{"size", row.size},
           {"d", row.d},
           {"lo", row.value.lo},
           {"hi", row.value.hi},
           {"argmax_phi", row.argmax_phi},
           {"argmax_psi", row.argmax_psi},
           {"truncation_K", row.truncation_K},
           {"search_evals", row.search_evals},
           {"runtime_ms", row.runtime_ms},
           {"nonmonotone", row.nonmonotone}};
    if (row.bound) e["bound"] = *row.bound;
    rows.push_back(std::move(e));
  }
  j = json{{"experiment", r.experiment}, {"config_hash", r.config_hash}, {"version", r.version},
           {"config", r.config},         {"rows", rows},                 {"reports", r.reports}};
  if (r.reference) j["reference"] = *r.reference;
}

void from_json(const json& j, ResultRecord& r) {
  r.experiment = j.at("experiment").get<std::string>();
  r.config_hash = j.at("config_hash").get<std::string>();
  r.version = j.at("version").get<std::string>();
  r.config = j.at("config");
  r.rows.clear();
  for (const json& e : j.at("rows")) {
    ResultRow row;
    row.size = e.at("size").get<std::uint64_t>();
    row.d = e.at("d").get<unsigned>();
    row.value = Interval{e.at("lo").get<double>(), e.at("hi").get<double>()};
    row.argmax_phi = e.at("argmax_phi").get<std::vector<double>>();
    row.argmax_psi = e.at("argmax_psi").get<std::vector<double>>();
    row.truncation_K = e.at("truncation_K").get<std::size_t>();
    row.search_evals = e.at("search_evals").get<std::uint64_t>();
    row.runtime_ms = e.at("runtime_ms").get<double>();
    row.nonmonotone = e.at("nonmonotone").get<bool>();
    if (e.contains("bound")) row.bound = e.at("bound").get<double>();
    r.rows.push_back(std::move(row));
  }
  r.reports.clear();
  for (const json& e : j.at("reports")) {
    r.reports.push_back({e.at("op").get<std::string>(), e.at("seed").get<std::uint64_t>(),
                         e.at("instances").get<std::size_t>(), e.at("max_abs_deviation").get<double>(),
                         e.at("pass").get<bool>()});
  }
  r.reference.reset();
  if (j.contains("reference")) r.reference = j.at("reference").get<double>();
}

ResultRecord compute(const ExperimentConfig& c, unsigned threads) {
  ResultRecord record;
  record.experiment = c.experiment;
  record.config = canonical_json(c);
  record.config_hash = config_hash(c);

  if (c.experiment == "oracle-certify") {
    record.reports.push_back(oracle::certify_pure_pairs(c.instances.pure, c.seed, c.tol, threads));
    record.reports.push_back(oracle::certify_mixed_pairs(c.instances.mixed, c.seed, c.tol, threads));
    record.reports.push_back(oracle::certify_implication(c.instances.implication, c.seed, c.tol, threads));
    return record;
  }

  const EmbezzlerFamily& family = *c.family;
  if (c.experiment == "witness") {
    for (std::size_t si = 0; si < c.size_list.size(); ++si) {
      const std::size_t k = c.k_schedule[std::min(si, c.k_schedule.size() - 1)];
      const ErrorBudget budget{k, c.tail_cap};
      const Spectrum omega = family_spectrum(with_size(family, c.size_list[si]), k);
      for (unsigned d : c.d_list) {
        const auto start = std::chrono::steady_clock::now();
        const TargetPair pair = witness_maximal_error(omega, d);
        ResultRow row;
        row.size = c.size_list[si];
        row.d = d;
        row.value = monopartite_error(omega, pair, budget);
        row.bound = 2.0 * (1.0 - static_cast<double>(omega.atom_count()) / d);
        row.argmax_phi = pair.phi.weights();
        row.argmax_psi = pair.psi.weights();
        row.truncation_K = k;
        row.search_evals = 1;
        row.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        record.rows.push_back(std::move(row));
      }
    }
    return record;
  }

  StudyConfig study;
  study.d_list = c.d_list;
  study.size_list = c.size_list;
  study.k_schedule = c.k_schedule;
  study.tail_cap = c.tail_cap;
  study.search = c.search;
  study.search.threads = threads;
  study.objective =
      c.experiment == "kappa-convergence" ? StudyObjective::kappa : StudyObjective::max_entangled_extraction;
  for (const StudyRow& s : convergence_study(family, study)) {
    ResultRow row = from_study(s);
    if (c.experiment == "vdh-table") row.bound = vdh_bound(row.size, row.d);
    record.rows.push_back(std::move(row));
  }
  if (c.experiment == "kappa-convergence") record.reference = reference_value(family);
  return record;
}

ResultRecord run(const ExperimentConfig& config, const RunOptions& options) {
  ensure_directory(options.out_dir);
  DirectoryLock lock(options.out_dir);

  fs::path cache_dir = options.out_dir / ".embz-cache";
  if (options.cache_dir) {
    cache_dir = *options.cache_dir;
  } else if (const char* env = std::getenv("EMBZ_CACHE_DIR"); env != nullptr && *env != '\0') {
    cache_dir = env;
  }
  const std::string hash = config_hash(config);
  const fs::path cache_file = cache_dir / (hash + ".json");

  ResultRecord record;
  bool hit = false;
  if (!options.force && fs::exists(cache_file)) {
    std::ifstream f(cache_file);
    try {
      record = json::parse(f).get<ResultRecord>();
      hit = record.config_hash == hash && record.version == kVersion;
    } catch (const json::exception&) {
      hit = false;  // unreadable entry: recompute and overwrite
    }
  }
  if (!hit) {
    record = compute(config, options.threads);
    ensure_directory(cache_dir);
    write_text(cache_file, json(record).dump(2) + "\n");
  }
  record.cache_hit = hit;
  write_results(record, options.out_dir);
  return record;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string results_csv(const ResultRecord& record) {
  std::string out;
  if (record.experiment == "oracle-certify") {
    out = "op,seed,instances,max_abs_deviation,pass\n";
    for (const auto& r : record.reports) {
      out += r.op + ',' + std::to_string(r.seed) + ',' + std::to_string(r.instances) + ',' +
             format_double(r.max_abs_deviation) + ',' + (r.pass ? "true" : "false") + '\n';
    }
    return out;
  }
  const bool bound = has_bound_column(record.experiment);
  out = bound ? "size,d,lo,hi,bound,argmax_phi,argmax_psi\n" : "size,d,lo,hi,argmax_phi,argmax_psi\n";
  for (const ResultRow& r : record.rows) {
    out += std::to_string(r.size) + ',' + std::to_string(r.d) + ',' + format_double(r.value.lo) + ',' +
           format_double(r.value.hi) + ',';
    if (bound) out += (r.bound ? format_double(*r.bound) : std::string()) + ',';
    out += join(r.argmax_phi) + ',' + join(r.argmax_psi) + '\n';
  }
  return out;
}

void write_results(const ResultRecord& record, const fs::path& out_dir) {
  ensure_directory(out_dir);
  write_text(out_dir / "results.csv", results_csv(record));
  json meta{{"experiment", record.experiment}, {"config", record.config},   {"config_hash", record.config_hash},
            {"version", record.version},       {"cache_hit", record.cache_hit}, {"reports", record.reports}};
  json rows = json::array();
  for (const ResultRow& r : record.rows) {
    rows.push_back({{"size", r.size},
                    {"d", r.d},
                    {"runtime_ms", r.runtime_ms},
                    {"truncation_K", r.truncation_K},
                    {"search_evals", r.search_evals},
                    {"nonmonotone", r.nonmonotone}});
  }
  meta["rows"] = rows;
  if (record.reference) meta["reference"] = *record.reference;
  write_text(out_dir / "results.meta.json", meta.dump(2) + "\n");
}

void emit_plotdata(const ResultRecord& record, const fs::path& out_dir) {
  if (record.rows.empty() && record.reports.empty()) throw ConfigError("cannot plot an empty record");
  const fs::path plot = out_dir / "plot";
  ensure_directory(plot);

  if (record.experiment == "oracle-certify") {
    std::string csv = "op,max_abs_deviation,pass\n";
    for (const auto& r : record.reports) {
      csv += r.op + ',' + format_double(r.max_abs_deviation) + ',' + (r.pass ? "true" : "false") + '\n';
    }
    write_text(plot / "deviation.csv", csv);
    return;
  }

  // Witness curves run over d at fixed size; the others over size at fixed d.
  const bool over_d = record.experiment == "witness";
  std::map<std::uint64_t, std::string> curves;
  std::map<std::uint64_t, std::string> bounds;
  for (const ResultRow& r : record.rows) {
    const std::uint64_t key = over_d ? r.size : r.d;
    const std::uint64_t x = over_d ? r.d : r.size;
    std::string& c = curves[key];
    if (c.empty()) c = "x,y,ylo,yhi\n";
    c += std::to_string(x) + ',' + format_double(r.value.lo) + ',' + format_double(r.value.lo) + ',' +
         format_double(r.value.hi) + '\n';
    if (r.bound) {
      std::string& b = bounds[key];
      if (b.empty()) b = "x,y\n";
      b += std::to_string(x) + ',' + format_double(*r.bound) + '\n';
    }
  }
  const std::string prefix = over_d ? "size=" : "d=";
  for (const auto& [key, csv] : curves) write_text(plot / (prefix + std::to_string(key) + ".csv"), csv);
  for (const auto& [key, csv] : bounds) write_text(plot / ("bound_" + prefix + std::to_string(key) + ".csv"), csv);

  if (record.reference) {
    std::set<std::uint64_t> xs;
    for (const ResultRow& r : record.rows) xs.insert(r.size);
    std::string csv = "x,y\n";
    for (std::uint64_t x : xs) csv += std::to_string(x) + ',' + format_double(*record.reference) + '\n';
    write_text(plot / "reference.csv", csv);
  }
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) != nullptr) return 2;
  if (dynamic_cast<const json::exception*>(&e) != nullptr) return 2;
  if (dynamic_cast<const NumericError*>(&e) != nullptr) return 3;
  if (dynamic_cast<const IoError*>(&e) != nullptr) return 4;
  if (dynamic_cast<const fs::filesystem_error*>(&e) != nullptr) return 4;
  return 1;
}

}  // namespace embz::cli
