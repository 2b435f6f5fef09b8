#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

#include "relpatch/checkpoint.hpp"
#include "relpatch/config.hpp"
#include "relpatch/grad_check.hpp"
#include "relpatch/rng.hpp"
#include "relpatch/train.hpp"

namespace relpatch {

namespace {

struct CommonOpts {
  std::string config_path;
  std::optional<std::int64_t> seed;
  std::optional<int> epochs, batch, megapatch;
  std::optional<std::string> tasks;
  bool no_pe = false;
  bool pe = false;
  bool shuffle = false;
  bool deterministic = false;
  std::string checkpoint, out_dir, data_dir;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path, "key = value settings file");
  cmd->add_option("--seed", o.seed, "RNG seed");
  cmd->add_option("--epochs", o.epochs, "training epochs");
  cmd->add_option("--batch", o.batch, "batch size");
  cmd->add_option("--tasks", o.tasks, "comma list: sp_rel,abs_pos,dist,angle,cls");
  cmd->add_option("--megapatch", o.megapatch, "mega-patch grid side M (0 = off)");
  auto* no_pe = cmd->add_flag("--no-pe", o.no_pe, "force positional embeddings off");
  cmd->add_flag("--pe", o.pe, "force positional embeddings on")->excludes(no_pe);
  cmd->add_flag("--shuffle", o.shuffle, "shuffle patch order (targets relabeled)");
  cmd->add_option("--checkpoint", o.checkpoint, "checkpoint to start from / evaluate");
  cmd->add_option("--out", o.out_dir, "output directory");
  cmd->add_flag("--deterministic", o.deterministic,
                "force fully sequential execution (always on in this build)");
  cmd->add_option("--data", o.data_dir, "dataset root (overrides RELPATCH_DATA)");
}

ModelConfig model_from_config(KeyValueConfig& cfg) {
  ModelConfig m = preset_config(cfg.get_string("preset", "tiny"));
  m.img_h = static_cast<int>(cfg.get_int("img_size", m.img_h));
  m.img_w = static_cast<int>(cfg.get_int("img_width", m.img_h));
  m.patch_size = static_cast<int>(cfg.get_int("patch_size", m.patch_size));
  m.channels = static_cast<int>(cfg.get_int("channels", m.channels));
  m.depth = static_cast<int>(cfg.get_int("depth", m.depth));
  m.heads = static_cast<int>(cfg.get_int("heads", m.heads));
  m.dim = static_cast<int>(cfg.get_int("dim", m.dim));
  m.mlp_ratio = static_cast<int>(cfg.get_int("mlp_ratio", m.mlp_ratio));
  m.num_classes = static_cast<int>(cfg.get_int("num_classes", m.num_classes));
  return m;
}

TrainPlan build_plan(Regime regime, const CommonOpts& o, KeyValueConfig& cfg) {
  TrainPlan plan;
  plan.regime = regime;
  plan.model = model_from_config(cfg);

  plan.epochs = static_cast<int>(cfg.get_int("epochs", plan.epochs));
  plan.warmup_epochs = static_cast<int>(cfg.get_int("warmup_epochs", plan.warmup_epochs));
  plan.lr_max = cfg.get_double("lr_max", plan.lr_max);
  plan.batch_size = static_cast<int>(cfg.get_int("batch_size", plan.batch_size));
  plan.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 0));
  plan.shuffle_patches = cfg.get_bool("shuffle", false);
  plan.megapatch_m = static_cast<int>(cfg.get_int("megapatch", 0));
  if (cfg.has("pos_embed")) plan.use_pos_embed = cfg.get_bool("pos_embed", true);
  if (cfg.has("tasks")) plan.tasks = TaskSet::parse(cfg.get_string("tasks", ""));
  plan.out_dir = cfg.get_string("out_dir", "");
  plan.init_checkpoint = cfg.get_string("init_checkpoint", "");

  plan.augment.enabled = cfg.get_bool("augment", plan.augment.enabled);
  plan.augment.crop_scale_min = cfg.get_double("crop_scale_min", plan.augment.crop_scale_min);
  plan.augment.crop_scale_max = cfg.get_double("crop_scale_max", plan.augment.crop_scale_max);
  plan.augment.jitter_brightness =
      cfg.get_double("jitter_brightness", plan.augment.jitter_brightness);
  plan.augment.jitter_contrast = cfg.get_double("jitter_contrast", plan.augment.jitter_contrast);
  plan.augment.jitter_saturation =
      cfg.get_double("jitter_saturation", plan.augment.jitter_saturation);
  plan.augment.jitter_hue = cfg.get_double("jitter_hue", plan.augment.jitter_hue);
  plan.augment.jitter_prob = cfg.get_double("jitter_prob", plan.augment.jitter_prob);
  plan.augment.grayscale_prob = cfg.get_double("grayscale_prob", plan.augment.grayscale_prob);

  if (o.seed) plan.seed = static_cast<std::uint64_t>(*o.seed);
  if (o.epochs) plan.epochs = *o.epochs;
  if (o.batch) plan.batch_size = *o.batch;
  if (o.megapatch) plan.megapatch_m = *o.megapatch;
  if (o.tasks) plan.tasks = TaskSet::parse(*o.tasks);
  if (o.shuffle) plan.shuffle_patches = true;
  if (o.no_pe) plan.use_pos_embed = false;
  if (o.pe) plan.use_pos_embed = true;
  if (!o.checkpoint.empty()) plan.init_checkpoint = o.checkpoint;
  if (!o.out_dir.empty()) plan.out_dir = o.out_dir;
  plan.deterministic = true;  // execution is always sequential
  return plan;
}

std::string dataset_root(const CommonOpts& o, KeyValueConfig& cfg) {
  if (!o.data_dir.empty()) return o.data_dir;
  std::string from_cfg = cfg.get_string("data_dir", "");
  if (!from_cfg.empty()) return from_cfg;
  if (const char* env = std::getenv("RELPATCH_DATA")) return env;
  return "";
}

std::pair<Dataset, Dataset> load_datasets(const TrainPlan& plan, const CommonOpts& o,
                                          KeyValueConfig& cfg) {
  const std::string kind = cfg.get_string("dataset", "synthetic");
  if (kind == "cifar10") {
    const std::string root = dataset_root(o, cfg);
    if (root.empty())
      throw ConfigError("cifar10 needs a dataset root: --data, data_dir, or RELPATCH_DATA");
    auto c = load_cifar10(root);
    const auto limit = cfg.get_int("train_limit", 0);
    if (limit > 0 && static_cast<size_t>(limit) < c.train.size()) c.train.resize(limit);
    const auto eval_limit = cfg.get_int("eval_limit", 0);
    if (eval_limit > 0 && static_cast<size_t>(eval_limit) < c.test.size())
      c.test.resize(eval_limit);
    return {std::move(c.train), std::move(c.test)};
  }
  if (kind != "synthetic") throw ConfigError("unknown dataset '" + kind + "'");

  SyntheticSpec spec;
  spec.seed = derive_seed(plan.seed, 1000);
  spec.count = static_cast<int>(cfg.get_int("synthetic_count", 512));
  spec.resolution = static_cast<int>(cfg.get_int("synthetic_resolution", plan.model.img_h));
  spec.num_classes = static_cast<int>(cfg.get_int("synthetic_classes", plan.model.num_classes));
  spec.generator = cfg.get_string("synthetic_generator", "gradient-fields");
  auto train = make_synthetic(spec);
  spec.seed = derive_seed(plan.seed, 1001);
  spec.count = static_cast<int>(cfg.get_int("synthetic_eval_count", std::max(1, spec.count / 4)));
  auto eval_set = make_synthetic(spec);
  return {std::move(train), std::move(eval_set)};
}

void print_metrics_row(const EpochMetrics& row) {
  std::cout << metrics_csv({row});
}

int do_train(Regime regime, const CommonOpts& o) {
  KeyValueConfig cfg = o.config_path.empty() ? KeyValueConfig()
                                             : KeyValueConfig::from_file(o.config_path);
  TrainPlan plan = build_plan(regime, o, cfg);
  auto [train_set, eval_set] = load_datasets(plan, o, cfg);
  cfg.finish();

  auto report = run(plan, train_set, eval_set);
  std::cout << metrics_csv(report.history);
  if (!report.checkpoint_path.empty())
    std::cerr << "checkpoint: " << report.checkpoint_path << "\n"
              << "metrics:    " << report.metrics_path << "\n";
  return 0;
}

int do_eval(const CommonOpts& o) {
  if (o.checkpoint.empty()) throw ConfigError("eval requires --checkpoint");
  KeyValueConfig cfg = o.config_path.empty() ? KeyValueConfig()
                                             : KeyValueConfig::from_file(o.config_path);
  // Consume the full training schema so one config file drives a whole
  // experiment; the model itself always comes from the checkpoint.
  TrainPlan file_plan = build_plan(Regime::pretrain, o, cfg);
  std::optional<bool> pe_override;
  if (o.no_pe) pe_override = false;
  if (o.pe) pe_override = true;
  auto lm = load_model(o.checkpoint, pe_override);

  TrainPlan plan;
  plan.model = lm.encoder.config();
  plan.seed = file_plan.seed;
  plan.shuffle_patches = file_plan.shuffle_patches;
  plan.megapatch_m = file_plan.megapatch_m;
  if (file_plan.tasks.any())
    plan.tasks = file_plan.tasks;
  else if (lm.has_ssl)
    plan.tasks.sp_rel = plan.tasks.abs_pos = true;
  else
    plan.tasks.classification = true;
  if (plan.tasks.any_ssl() && !lm.has_ssl)
    throw ConfigError("checkpoint has no task heads; only cls can be evaluated");

  auto [train_set, eval_set] = load_datasets(plan, o, cfg);
  cfg.finish();
  (void)train_set;

  auto row = evaluate(lm.encoder, lm.heads, eval_set, plan);
  print_metrics_row(row);
  if (!o.out_dir.empty()) {
    std::filesystem::create_directories(o.out_dir);
    const auto path = (std::filesystem::path(o.out_dir) / "eval.csv").string();
    std::ofstream f(path, std::ios::binary);
    f << metrics_csv({row});
    std::cerr << "metrics: " << path << "\n";
  }
  return 0;
}

int do_labels(int rows, int cols, int megapatch, std::uint64_t seed,
              const std::string& out_path) {
  const PatchGrid grid(rows, cols, 1, 1);
  nlohmann::json j;
  TargetSet t;
  if (megapatch > 0) {
    // Sample one layout on the rows x cols lattice and dump the targets of
    // the resulting M x M mega-lattice together with the cuts.
    auto rng = make_rng(seed);
    const auto layout = sample_megapatch_layout(grid, megapatch, rng);
    const PatchGrid mega(megapatch, megapatch, 1, 1);
    std::vector<GridPos> pos(static_cast<size_t>(mega.n_tokens()));
    for (int i = 0; i < mega.n_tokens(); ++i) pos[static_cast<size_t>(i)] = position_of(i, mega);
    t = build_target_set(mega, pos);
    j["megapatch"] = megapatch;
    j["row_cuts"] = layout.row_cuts;
    j["col_cuts"] = layout.col_cuts;
  } else {
    std::vector<GridPos> pos(static_cast<size_t>(grid.n_tokens()));
    for (int i = 0; i < grid.n_tokens(); ++i) pos[static_cast<size_t>(i)] = position_of(i, grid);
    t = build_target_set(grid, pos);
  }

  j["rows"] = rows;
  j["cols"] = cols;
  j["n"] = t.n;
  j["d_max"] = t.d_max;
  j["alpha_max"] = t.alpha_max;
  j["abs_pos"] = t.abs_pos;
  auto matrix = [&](const auto& flat) {
    nlohmann::json m = nlohmann::json::array();
    for (int i = 0; i < t.n; ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (int k = 0; k < t.n; ++k) row.push_back(flat[static_cast<size_t>(i) * t.n + k]);
      m.push_back(std::move(row));
    }
    return m;
  };
  j["relation"] = matrix(t.rel);
  j["distance"] = matrix(t.dist);
  j["angle"] = matrix(t.ang);
  j["relation_classes"] = {
      {"0", "left-top"},    {"1", "center-top"},    {"2", "right-top"},
      {"3", "left-center"}, {"4", "center-center"}, {"5", "right-center"},
      {"6", "left-bottom"}, {"7", "center-bottom"}, {"8", "right-bottom"}};

  const std::string text = j.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw IoError("cannot write " + out_path);
    f << text;
    std::cerr << "labels: " << out_path << "\n";
  }
  return 0;
}

int do_gradcheck(const std::string& config, std::uint64_t seed, const std::string& tasks_csv) {
  ModelConfig m;
  try {
    m = preset_config(config);
  } catch (const ConfigError&) {
    KeyValueConfig cfg = KeyValueConfig::from_file(config);
    m = model_from_config(cfg);
    cfg.finish();
  }
  m.validate();

  TaskSet tasks = TaskSet::parse(tasks_csv);
  EncoderD enc(m);
  auto rng = make_rng(seed);
  enc.init_weights(rng);
  SslHeads<double> heads(m.dim, m.grid().n_tokens());
  heads.init_weights(rng);

  const PatchGrid grid = m.grid();
  std::vector<GridPos> pos(static_cast<size_t>(grid.n_tokens()));
  for (int i = 0; i < grid.n_tokens(); ++i) pos[static_cast<size_t>(i)] = position_of(i, grid);
  const TargetSet targets = build_target_set(grid, pos);

  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> img(static_cast<size_t>(grid.channels) * grid.img_h * grid.img_w);
  for (auto& v : img) v = u(rng);
  auto rows = patchify(TensorD::from_values({grid.channels, grid.img_h, grid.img_w}, img), grid);

  std::vector<NamedParam> params;
  for (auto& p : enc.parameters()) params.push_back({p.name, p.tensor});
  if (tasks.any_ssl())
    for (auto& p : heads.parameters()) params.push_back({p.name, p.tensor});

  auto f = [&] {
    auto out = enc.forward(rows);
    return total_loss(out.patch_tokens, out.class_logits, targets, heads, tasks,
                      tasks.classification ? std::optional<int>(0) : std::nullopt)
        .total;
  };
  auto report = grad_check(f, params, 1e-5, 2, derive_seed(seed, 7));
  std::cout << "max relative error: " << report.max_relative_error << " at "
            << report.worst_parameter << " (analytic " << report.analytic << ", numeric "
            << report.numeric << ")\n";
  return report.max_relative_error < 1e-4 ? 0 : 1;
}

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;  // epoch, value
};

int do_plot(const std::string& in_path, std::string out_path, const std::string& metrics_list,
            const std::string& split) {
  std::ifstream f(in_path);
  if (!f) throw IoError("cannot open " + in_path);
  std::string header;
  if (!std::getline(f, header)) throw IoError(in_path + ": empty file");

  std::vector<std::string> cols;
  {
    size_t at = 0;
    while (at <= header.size()) {
      size_t end = header.find(',', at);
      if (end == std::string::npos) end = header.size();
      cols.push_back(header.substr(at, end - at));
      at = end + 1;
    }
  }
  auto col_index = [&](const std::string& name) {
    for (size_t i = 0; i < cols.size(); ++i)
      if (cols[i] == name) return static_cast<int>(i);
    throw ConfigError(in_path + ": no column '" + name + "'");
  };
  const int epoch_col = col_index("epoch"), split_col = col_index("split");

  std::vector<std::string> wanted;
  {
    size_t at = 0;
    while (at <= metrics_list.size()) {
      size_t end = metrics_list.find(',', at);
      if (end == std::string::npos) end = metrics_list.size();
      if (end > at) wanted.push_back(metrics_list.substr(at, end - at));
      at = end + 1;
    }
  }
  if (wanted.empty()) throw ConfigError("plot: empty metric list");

  std::vector<Series> series;
  std::vector<int> want_idx;
  for (const auto& name : wanted) want_idx.push_back(col_index(name));
  for (const auto& sp : {std::string("train"), std::string("eval")}) {
    if (split != "both" && split != sp) continue;
    for (const auto& name : wanted) series.push_back({name + "/" + sp, {}});
  }

  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<std::string> parts;
    size_t at = 0;
    while (at <= line.size()) {
      size_t end = line.find(',', at);
      if (end == std::string::npos) end = line.size();
      parts.push_back(line.substr(at, end - at));
      at = end + 1;
    }
    if (parts.size() != cols.size()) throw IoError(in_path + ": ragged row");
    const std::string& sp = parts[static_cast<size_t>(split_col)];
    if (split != "both" && split != sp) continue;
    size_t base = 0;
    if (split == "both" && sp == "eval") base = wanted.size();
    for (size_t k = 0; k < wanted.size(); ++k) {
      const std::string& cell = parts[static_cast<size_t>(want_idx[k])];
      if (cell == "nan") continue;
      series[base + k].points.push_back(
          {std::stod(parts[static_cast<size_t>(epoch_col)]), std::stod(cell)});
    }
  }

  size_t total_points = 0;
  for (const auto& s : series) total_points += s.points.size();
  if (total_points == 0) throw ConfigError("plot: no data points for the requested metrics");

  double x_min = 1e300, x_max = -1e300, y_min = 1e300, y_max = -1e300;
  for (const auto& s : series)
    for (auto [x, y] : s.points) {
      x_min = std::min(x_min, x), x_max = std::max(x_max, x);
      y_min = std::min(y_min, y), y_max = std::max(y_max, y);
    }
  if (x_max == x_min) x_max = x_min + 1;
  if (y_max == y_min) y_max = y_min + 1;

  const double W = 720, H = 440, L = 70, R = 20, T = 20, B = 50;
  auto px = [&](double x) { return L + (x - x_min) / (x_max - x_min) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y_min) / (y_max - y_min) * (H - T - B); };
  const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                           "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

  std::string svg;
  char buf[256];
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"440\" "
         "font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect width=\"720\" height=\"440\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf,
                "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n",
                L, H - B, W - R, H - B);
  svg += buf;
  std::snprintf(buf, sizeof buf,
                "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n",
                L, T, L, H - B);
  svg += buf;
  for (int i = 0; i <= 4; ++i) {
    const double yv = y_min + (y_max - y_min) * i / 4.0;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\">%.4g</text>\n", L - 6,
                  py(yv) + 4, yv);
    svg += buf;
    const double xv = x_min + (x_max - x_min) * i / 4.0;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">%.4g</text>\n", px(xv),
                  H - B + 18, xv);
    svg += buf;
  }
  std::snprintf(buf, sizeof buf,
                "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">epoch</text>\n",
                (L + W - R) / 2, H - 8);
  svg += buf;

  int color = 0;
  double legend_y = T + 6;
  for (const auto& s : series) {
    if (s.points.empty()) continue;
    const char* c = palette[color % 8];
    std::string pts;
    for (auto [x, y] : s.points) {
      std::snprintf(buf, sizeof buf, "%.1f,%.1f ", px(x), py(y));
      pts += buf;
    }
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(c) + "\" stroke-width=\"1.5\" points=\"" +
           pts + "\"/>\n";
    std::snprintf(buf, sizeof buf,
                  "<rect x=\"%.1f\" y=\"%.1f\" width=\"10\" height=\"10\" fill=\"%s\"/>"
                  "<text x=\"%.1f\" y=\"%.1f\">%s</text>\n",
                  W - R - 170, legend_y, c, W - R - 154, legend_y + 9, s.name.c_str());
    svg += buf;
    legend_y += 16;
    ++color;
  }
  svg += "</svg>\n";

  if (out_path.empty()) {
    out_path = in_path;
    const auto dot = out_path.find_last_of('.');
    if (dot != std::string::npos) out_path.erase(dot);
    out_path += ".svg";
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw IoError("cannot write " + out_path);
  out << svg;
  std::cerr << "plot: " << out_path << "\n";
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"self-supervised patch-relation training toolkit"};
  app.require_subcommand(1);

  CommonOpts pre_o, fine_o, down_o, eval_o;
  auto* pre = app.add_subcommand("pretrain", "train the auxiliary tasks from scratch");
  add_common(pre, pre_o);
  auto* fine = app.add_subcommand("finetune", "train classification from a checkpoint");
  add_common(fine, fine_o);
  auto* down = app.add_subcommand("downstream", "train classification + auxiliary tasks jointly");
  add_common(down, down_o);
  auto* evalc = app.add_subcommand("eval", "evaluate a checkpoint");
  add_common(evalc, eval_o);

  int lab_rows = 3, lab_cols = 3, lab_mega = 0;
  std::uint64_t lab_seed = 0;
  std::string lab_out;
  auto* labels = app.add_subcommand("labels", "dump pairwise targets for a lattice as JSON");
  labels->add_option("--rows", lab_rows, "lattice rows")->check(CLI::PositiveNumber);
  labels->add_option("--cols", lab_cols, "lattice columns")->check(CLI::PositiveNumber);
  labels->add_option("--megapatch", lab_mega, "sample an M x M mega-patch layout first");
  labels->add_option("--seed", lab_seed, "layout sampling seed");
  labels->add_option("--out", lab_out, "output file (default stdout)");

  std::string gc_config = "micro";
  std::uint64_t gc_seed = 0;
  std::string gc_tasks = "sp_rel,abs_pos,dist,angle,cls";
  auto* gradcheck = app.add_subcommand("gradcheck",
                                       "compare analytic gradients to finite differences");
  gradcheck->add_option("--config", gc_config, "model preset name or config file");
  gradcheck->add_option("--seed", gc_seed, "RNG seed");
  gradcheck->add_option("--tasks", gc_tasks, "tasks included in the checked loss");

  std::string plot_in, plot_out, plot_metrics = "loss_total", plot_split = "both";
  auto* plot = app.add_subcommand("plot", "render a metrics CSV as an SVG line chart");
  plot->add_option("csv", plot_in, "metrics CSV")->required();
  plot->add_option("--out", plot_out, "output SVG path (default: CSV path with .svg)");
  plot->add_option("--metrics", plot_metrics, "comma list of columns to draw");
  plot->add_option("--split", plot_split, "train, eval, or both")
      ->check(CLI::IsMember({"train", "eval", "both"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (pre->parsed()) return do_train(Regime::pretrain, pre_o);
    if (fine->parsed()) return do_train(Regime::finetune, fine_o);
    if (down->parsed()) return do_train(Regime::downstream, down_o);
    if (evalc->parsed()) return do_eval(eval_o);
    if (labels->parsed()) return do_labels(lab_rows, lab_cols, lab_mega, lab_seed, lab_out);
    if (gradcheck->parsed()) return do_gradcheck(gc_config, gc_seed, gc_tasks);
    if (plot->parsed()) return do_plot(plot_in, plot_out, plot_metrics, plot_split);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace relpatch
