#include "latentforge/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace latentforge {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

constexpr std::uint64_t kLatentDrawStream = 401;

[[noreturn]] void fail(const std::string& message) {
  throw std::invalid_argument("config: " + message);
}

void check_object(const json& j, const std::string& path,
                  const std::set<std::string>& allowed) {
  if (!j.is_object()) fail(path + " must be an object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) fail("unknown key " + path + "." + key);
}

template <typename T>
void get_if(const json& j, const char* key, T& out, const std::string& path) {
  if (!j.contains(key)) return;
  try {
    j.at(key).get_to(out);
  } catch (const json::exception&) {
    fail("bad value for " + path + "." + key);
  }
}

void apply_generator(const json& j, GeneratorConfig& c) {
  check_object(j, "generator",
               {"kind", "seed", "z_dim", "y_dim", "height", "width", "blobs"});
  get_if(j, "kind", c.kind, "generator");
  get_if(j, "seed", c.seed, "generator");
  get_if(j, "z_dim", c.z_dim, "generator");
  get_if(j, "y_dim", c.y_dim, "generator");
  get_if(j, "height", c.height, "generator");
  get_if(j, "width", c.width, "generator");
  get_if(j, "blobs", c.blobs, "generator");
  if (c.kind != "blob") fail("generator.kind must be \"blob\"");
  if (c.z_dim < 1 || c.y_dim < 0) fail("generator dims invalid");
  if (c.height < 8 || c.width < 8) fail("generator image must be at least 8x8");
}

void apply_scorer(const json& j, ScorerConfig& c) {
  check_object(j, "scorer", {"kind", "seed", "planted_target_seed", "basin"});
  get_if(j, "kind", c.kind, "scorer");
  get_if(j, "seed", c.seed, "scorer");
  get_if(j, "planted_target_seed", c.planted_target_seed, "scorer");
  if (j.contains("basin")) {
    const json& b = j.at("basin");
    check_object(b, "scorer.basin",
                 {"wrong_seed", "right_seed", "sigma_narrow", "sigma_broad",
                  "amp_narrow", "amp_broad"});
    get_if(b, "wrong_seed", c.basin.wrong_seed, "scorer.basin");
    get_if(b, "right_seed", c.basin.right_seed, "scorer.basin");
    get_if(b, "sigma_narrow", c.basin.sigma_narrow, "scorer.basin");
    get_if(b, "sigma_broad", c.basin.sigma_broad, "scorer.basin");
    get_if(b, "amp_narrow", c.basin.amp_narrow, "scorer.basin");
    get_if(b, "amp_broad", c.basin.amp_broad, "scorer.basin");
  }
  if (c.kind != "hash_embed" && c.kind != "planted" && c.kind != "two_basin")
    fail("scorer.kind must be hash_embed, planted or two_basin");
}

void apply_aug(const json& j, AugConfig& c) {
  check_object(j, "aug",
               {"enabled", "n_draws", "color", "translate", "resize", "cutout"});
  get_if(j, "enabled", c.enabled, "aug");
  get_if(j, "n_draws", c.n_draws, "aug");
  if (j.contains("color")) {
    const json& k = j.at("color");
    check_object(k, "aug.color", {"brightness", "contrast"});
    get_if(k, "brightness", c.ranges.brightness, "aug.color");
    if (k.contains("contrast")) {
      std::vector<double> range;
      get_if(k, "contrast", range, "aug.color");
      if (range.size() != 2) fail("aug.color.contrast must be [lo, hi]");
      c.ranges.contrast_lo = range[0];
      c.ranges.contrast_hi = range[1];
    }
  }
  if (j.contains("translate")) {
    const json& k = j.at("translate");
    check_object(k, "aug.translate", {"max_frac"});
    get_if(k, "max_frac", c.ranges.translate_max_frac, "aug.translate");
  }
  if (j.contains("resize")) {
    const json& k = j.at("resize");
    check_object(k, "aug.resize", {"range"});
    if (k.contains("range")) {
      std::vector<double> range;
      get_if(k, "range", range, "aug.resize");
      if (range.size() != 2) fail("aug.resize.range must be [lo, hi]");
      c.ranges.resize_lo = range[0];
      c.ranges.resize_hi = range[1];
    }
  }
  if (j.contains("cutout")) {
    const json& k = j.at("cutout");
    check_object(k, "aug.cutout", {"frac"});
    get_if(k, "frac", c.ranges.cutout_frac, "aug.cutout");
  }
  if (c.n_draws < 1) fail("aug.n_draws must be >= 1");
  parse_aug_set(c.enabled);  // validates the names
}

void apply_opt(const json& j, OptConfig& c) {
  check_object(j, "opt", {"lr", "iters", "weight_decay"});
  get_if(j, "lr", c.lr, "opt");
  get_if(j, "iters", c.iters, "opt");
  get_if(j, "weight_decay", c.weight_decay, "opt");
  if (c.lr <= 0.0) fail("opt.lr must be > 0");
  if (c.iters < 0) fail("opt.iters must be >= 0");
}

void apply_init(const json& j, InitConfig& c) {
  check_object(j, "init", {"M", "k", "batch", "y_mode", "classes"});
  get_if(j, "M", c.num_candidates, "init");
  get_if(j, "k", c.top_k, "init");
  get_if(j, "batch", c.batch, "init");
  get_if(j, "y_mode", c.y_mode, "init");
  get_if(j, "classes", c.classes, "init");
  if (c.top_k < 1 || c.num_candidates < c.top_k) fail("init: need 1 <= k <= M");
  if (c.batch < 1) fail("init.batch must be >= 1");
  if (c.y_mode != "class-table" && c.y_mode != "gaussian")
    fail("init.y_mode must be class-table or gaussian");
  if (c.classes < 1) fail("init.classes must be >= 1");
}

void apply_dbgd(const json& j, DbgdConfig& c) {
  check_object(j, "dbgd", {"beta", "tau", "variant", "lambda_fixed"});
  get_if(j, "beta", c.beta, "dbgd");
  get_if(j, "tau", c.tau, "dbgd");
  get_if(j, "variant", c.variant, "dbgd");
  get_if(j, "lambda_fixed", c.lambda_fixed, "dbgd");
  if (c.beta < 0.0) fail("dbgd.beta must be >= 0");
  if (c.tau <= 0.0) fail("dbgd.tau must be > 0");
  if (c.variant != "dbgd" && c.variant != "linear" && c.variant != "inverse")
    fail("dbgd.variant must be dbgd, linear or inverse");
}

void apply_compose(const json& j, ComposeConfig& c) {
  check_object(j, "compose", {"alphas", "positions", "per", "poisson"});
  get_if(j, "alphas", c.alphas, "compose");
  get_if(j, "positions", c.positions, "compose");
  if (j.contains("per")) {
    const json& k = j.at("per");
    check_object(k, "compose.per", {"levels", "window"});
    get_if(k, "levels", c.per_levels, "compose.per");
    get_if(k, "window", c.per_window, "compose.per");
  }
  if (j.contains("poisson")) {
    const json& k = j.at("poisson");
    check_object(k, "compose.poisson", {"tol", "max_iters"});
    get_if(k, "tol", c.poisson_tol, "compose.poisson");
    get_if(k, "max_iters", c.poisson_max_iters, "compose.poisson");
  }
  if (c.alphas.empty()) fail("compose.alphas must be non-empty");
  for (double a : c.alphas)
    if (a <= 0.0 || a > 1.0) fail("compose.alphas entries must be in (0, 1]");
  for (const std::string& p : c.positions) parse_position(p);
  if (c.per_levels < 1 || c.per_window < 1) fail("compose.per invalid");
  if (c.poisson_tol <= 0.0 || c.poisson_max_iters < 1) fail("compose.poisson invalid");
}

void apply_attack(const json& j, AttackConfig& c) {
  check_object(j, "attack", {"epsilon", "seeds"});
  get_if(j, "epsilon", c.epsilon, "attack");
  get_if(j, "seeds", c.seeds, "attack");
  if (c.epsilon < 0.0) fail("attack.epsilon must be >= 0");
  if (c.seeds < 1) fail("attack.seeds must be >= 1");
}

void apply_interpolate(const json& j, InterpolateConfig& c) {
  check_object(j, "interpolate", {"xi1", "xi2", "steps"});
  get_if(j, "xi1", c.xi1, "interpolate");
  get_if(j, "xi2", c.xi2, "interpolate");
  get_if(j, "steps", c.steps, "interpolate");
  if (c.steps < 1) fail("interpolate.steps must be >= 1");
}

void apply_bench(const json& j, BenchConfig& c) {
  check_object(j, "bench", {"seeds", "iters", "lr", "n_draws", "init_noise"});
  get_if(j, "seeds", c.seeds, "bench");
  get_if(j, "iters", c.iters, "bench");
  get_if(j, "lr", c.lr, "bench");
  get_if(j, "n_draws", c.n_draws, "bench");
  get_if(j, "init_noise", c.init_noise, "bench");
  if (c.seeds < 1 || c.iters < 1 || c.lr <= 0.0 || c.n_draws < 1)
    fail("bench settings invalid");
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(std::string("invalid JSON: ") + e.what());
  }
  check_object(j, "<root>",
               {"query", "seed", "out", "generator", "scorer", "aug", "opt",
                "init", "dbgd", "compose", "attack", "interpolate", "bench"});
  RunConfig c;
  get_if(j, "query", c.query, "<root>");
  get_if(j, "seed", c.seed, "<root>");
  get_if(j, "out", c.out, "<root>");
  if (j.contains("generator")) apply_generator(j.at("generator"), c.generator);
  if (j.contains("scorer")) apply_scorer(j.at("scorer"), c.scorer);
  if (j.contains("aug")) apply_aug(j.at("aug"), c.aug);
  if (j.contains("opt")) apply_opt(j.at("opt"), c.opt);
  if (j.contains("init")) apply_init(j.at("init"), c.init);
  if (j.contains("dbgd")) apply_dbgd(j.at("dbgd"), c.dbgd);
  if (j.contains("compose")) apply_compose(j.at("compose"), c.compose);
  if (j.contains("attack")) apply_attack(j.at("attack"), c.attack);
  if (j.contains("interpolate")) apply_interpolate(j.at("interpolate"), c.interpolate);
  if (j.contains("bench")) apply_bench(j.at("bench"), c.bench);
  return c;
}

RunConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string resolved_config_json(const RunConfig& c) {
  ordered_json j;
  j["query"] = c.query;
  j["seed"] = c.seed;
  j["out"] = c.out;
  j["generator"] = {{"kind", c.generator.kind},     {"seed", c.generator.seed},
                    {"z_dim", c.generator.z_dim},   {"y_dim", c.generator.y_dim},
                    {"height", c.generator.height}, {"width", c.generator.width},
                    {"blobs", c.generator.blobs}};
  j["scorer"] = {{"kind", c.scorer.kind},
                 {"seed", c.scorer.seed},
                 {"planted_target_seed", c.scorer.planted_target_seed},
                 {"basin",
                  {{"wrong_seed", c.scorer.basin.wrong_seed},
                   {"right_seed", c.scorer.basin.right_seed},
                   {"sigma_narrow", c.scorer.basin.sigma_narrow},
                   {"sigma_broad", c.scorer.basin.sigma_broad},
                   {"amp_narrow", c.scorer.basin.amp_narrow},
                   {"amp_broad", c.scorer.basin.amp_broad}}}};
  j["aug"] = {
      {"enabled", c.aug.enabled},
      {"n_draws", c.aug.n_draws},
      {"color",
       {{"brightness", c.aug.ranges.brightness},
        {"contrast", {c.aug.ranges.contrast_lo, c.aug.ranges.contrast_hi}}}},
      {"translate", {{"max_frac", c.aug.ranges.translate_max_frac}}},
      {"resize", {{"range", {c.aug.ranges.resize_lo, c.aug.ranges.resize_hi}}}},
      {"cutout", {{"frac", c.aug.ranges.cutout_frac}}}};
  j["opt"] = {{"lr", c.opt.lr},
              {"iters", c.opt.iters},
              {"weight_decay", c.opt.weight_decay}};
  j["init"] = {{"M", c.init.num_candidates},
               {"k", c.init.top_k},
               {"batch", c.init.batch},
               {"y_mode", c.init.y_mode},
               {"classes", c.init.classes}};
  j["dbgd"] = {{"beta", c.dbgd.beta},
               {"tau", c.dbgd.tau},
               {"variant", c.dbgd.variant},
               {"lambda_fixed", c.dbgd.lambda_fixed}};
  std::vector<std::string> positions = c.compose.positions;
  if (positions.empty())
    for (const PastePosition& p : all_positions())
      positions.push_back(to_string(p));
  j["compose"] = {
      {"alphas", c.compose.alphas},
      {"positions", positions},
      {"per", {{"levels", c.compose.per_levels}, {"window", c.compose.per_window}}},
      {"poisson",
       {{"tol", c.compose.poisson_tol}, {"max_iters", c.compose.poisson_max_iters}}}};
  j["attack"] = {{"epsilon", c.attack.epsilon}, {"seeds", c.attack.seeds}};
  j["interpolate"] = {{"xi1", c.interpolate.xi1},
                      {"xi2", c.interpolate.xi2},
                      {"steps", c.interpolate.steps}};
  j["bench"] = {{"seeds", c.bench.seeds},
                {"iters", c.bench.iters},
                {"lr", c.bench.lr},
                {"n_draws", c.bench.n_draws},
                {"init_noise", c.bench.init_noise}};
  return j.dump(2) + "\n";
}

std::unique_ptr<Generator> make_generator(const GeneratorConfig& config) {
  BlobGenerator::Settings s;
  s.z_dim = config.z_dim;
  s.y_dim = config.y_dim;
  s.height = config.height;
  s.width = config.width;
  s.blobs = config.blobs;
  s.seed = config.seed;
  return std::make_unique<BlobGenerator>(s);
}

std::vector<std::vector<double>> class_table_for(const RunConfig& config) {
  return make_class_table(config.generator.seed, config.init.classes,
                          config.generator.y_dim);
}

LatentCode sample_latent(const GeneratorDims& dims,
                         const std::vector<std::vector<double>>& class_table,
                         RngStream rng) {
  LatentCode code;
  code.z.resize(dims.z_dim);
  for (double& v : code.z) v = rng.normal();
  code = truncate_z(std::move(code));
  code.y.resize(dims.y_dim);
  if (dims.y_dim > 0) {
    if (!class_table.empty()) {
      code.y = class_table[static_cast<std::size_t>(
          rng.uniform_int(static_cast<std::int64_t>(class_table.size())))];
    } else {
      for (double& v : code.y) v = rng.normal();
    }
  }
  return code;
}

LatentCode latent_from_seed(std::uint64_t seed, const GeneratorDims& dims,
                            const std::vector<std::vector<double>>& class_table) {
  return sample_latent(dims, class_table, RngStream(seed, kLatentDrawStream));
}

std::unique_ptr<Scorer> make_scorer(const RunConfig& config,
                                    const Generator& generator) {
  const ScorerConfig& s = config.scorer;
  if (s.kind == "hash_embed") return std::make_unique<HashEmbedScorer>(s.seed);
  auto table = class_table_for(config);
  if (s.kind == "planted") {
    LatentCode target =
        latent_from_seed(s.planted_target_seed, generator.dims(), table);
    return std::make_unique<PlantedScorer>(generator, target, s.seed);
  }
  if (s.kind == "two_basin") {
    LatentCode wrong =
        latent_from_seed(s.basin.wrong_seed, generator.dims(), table);
    LatentCode right =
        latent_from_seed(s.basin.right_seed, generator.dims(), table);
    TwoBasinScorer::Settings settings;
    settings.sigma_narrow = s.basin.sigma_narrow;
    settings.sigma_broad = s.basin.sigma_broad;
    settings.amp_narrow = s.basin.amp_narrow;
    settings.amp_broad = s.basin.amp_broad;
    settings.seed = s.seed;
    return std::make_unique<TwoBasinScorer>(generator, wrong, right, settings);
  }
  fail("unknown scorer kind " + s.kind);
}

AugSet parse_aug_set(const std::vector<std::string>& names) {
  AugSet set;
  for (const std::string& name : names) {
    if (name == "color") set.color = true;
    else if (name == "translate") set.translate = true;
    else if (name == "resize") set.resize = true;
    else if (name == "cutout") set.cutout = true;
    else fail("unknown augmentation " + name);
  }
  return set;
}

AugSpec aug_spec_from(const RunConfig& config) {
  AugSpec spec;
  spec.enabled = parse_aug_set(config.aug.enabled);
  spec.n_draws = config.aug.n_draws;
  spec.ranges = config.aug.ranges;
  spec.stream = RngStream(config.seed, 0);
  return spec;
}

InitSettings init_settings_from(const RunConfig& config) {
  InitSettings s;
  s.num_candidates = config.init.num_candidates;
  s.top_k = config.init.top_k;
  s.batch = config.init.batch;
  s.y_mode = config.init.y_mode == "gaussian" ? InitSettings::YMode::Gaussian
                                              : InitSettings::YMode::ClassTable;
  if (s.y_mode == InitSettings::YMode::ClassTable)
    s.class_table = class_table_for(config);
  return s;
}

OptimSettings optim_settings_from(const RunConfig& config) {
  OptimSettings s;
  s.lr = config.opt.lr;
  s.iterations = config.opt.iters;
  s.weight_decay = config.opt.weight_decay;
  return s;
}

BarrierSettings barrier_settings_from(const RunConfig& config) {
  BarrierSettings s;
  s.beta = config.dbgd.beta;
  s.tau = config.dbgd.tau;
  s.variant = config.dbgd.variant == "linear"
                  ? BarrierSettings::Variant::Linear
                  : (config.dbgd.variant == "inverse"
                         ? BarrierSettings::Variant::Inverse
                         : BarrierSettings::Variant::Dbgd);
  s.lambda_fixed = config.dbgd.lambda_fixed;
  return s;
}

PerceptualSettings perceptual_settings_from(const RunConfig& config) {
  PerceptualSettings s;
  s.levels = config.compose.per_levels;
  s.window = config.compose.per_window;
  return s;
}

PoissonSettings poisson_settings_from(const RunConfig& config) {
  return {config.compose.poisson_tol, config.compose.poisson_max_iters};
}

std::vector<CompositionParams> composition_grid_from(const RunConfig& config) {
  std::vector<PastePosition> positions;
  if (config.compose.positions.empty()) {
    positions = all_positions();
  } else {
    for (const std::string& p : config.compose.positions)
      positions.push_back(parse_position(p));
  }
  return composition_grid(config.compose.alphas, positions);
}

void write_latent_json(const LatentCode& code,
                       const std::filesystem::path& path) {
  ordered_json j;
  j["z"] = code.z;
  j["y"] = code.y;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

LatentCode read_latent_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open latent file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("bad latent file " + path.string() + ": " + e.what());
  }
  LatentCode code;
  if (!j.is_object() || !j.contains("z") || !j.contains("y"))
    throw std::runtime_error("latent file must contain z and y arrays");
  j.at("z").get_to(code.z);
  j.at("y").get_to(code.y);
  if (code.z.empty()) throw std::runtime_error("latent z must be non-empty");
  return code;
}

}  // namespace latentforge
