#include "proa/cli.hpp"

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "proa/baselines.hpp"
#include "proa/classifier.hpp"
#include "proa/dataset.hpp"
#include "proa/errors.hpp"
#include "proa/parallel.hpp"
#include "proa/report.hpp"

namespace proa::cli {

namespace {

using nlohmann::json;

/// Error tagged with the exit status it should produce.
struct StageError : std::runtime_error {
  StageError(int code, const std::string& what) : std::runtime_error(what), code(code) {}
  int code;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

double parse_double(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("cannot parse " + what + " '" + text + "'");
  }
}

struct Loaded {
  std::unique_ptr<Classifier> model;
  ModelDescriptor descriptor;
  dataset::LoadResult data;
};

Loaded load_inputs(const RunConfig& config, std::ostream& log, bool require_dataset) {
  Loaded l;
  if (config.model.empty()) throw StageError(kConfigError, "--model is required");
  try {
    l.model = open_model(config.model, &l.descriptor);
  } catch (const ConfigError& e) {
    throw StageError(kConfigError, e.what());
  } catch (const std::exception& e) {
    throw StageError(kModelError, std::string("cannot load model: ") + e.what());
  }
  if (config.dataset.empty()) {
    if (require_dataset) throw StageError(kConfigError, "--dataset is required");
    return l;
  }
  try {
    l.data = dataset::load_dataset(config.dataset, {l.descriptor.input_shape, l.descriptor.num_classes});
  } catch (const std::exception& e) {
    throw StageError(kDatasetError, e.what());
  }
  for (const auto& issue : l.data.issues) {
    log << "warning: skipped " << issue.file;
    if (issue.line) log << " (index line " << issue.line << ")";
    log << ": " << issue.message << '\n';
  }
  return l;
}

json issues_json(const dataset::LoadResult& data) {
  json arr = json::array();
  for (const auto& i : data.issues) arr.push_back({{"file", i.file}, {"line", i.line}, {"message", i.message}});
  return arr;
}

json config_json(const RunConfig& c, const perturb::PerturbationSpec& spec) {
  json box = json::array();
  for (const auto& r : spec.box) box.push_back({r.low, r.high});
  return {{"model", c.model},
          {"dataset", c.dataset.string()},
          {"perturbation", c.perturbation},
          {"box", box},
          {"tau", c.verify.tau},
          {"delta", c.verify.delta},
          {"n0", c.verify.n0},
          {"nmax", c.verify.n_max},
          {"seed", c.verify.seed}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string csv_text(const std::vector<report::ReportRow>& rows, bool timing) {
  std::ostringstream os;
  report::write_csv(os, rows, timing);
  return os.str();
}

std::vector<report::ReportRow> rows_for(const std::vector<ImageResult>& results, const std::string& family) {
  std::vector<report::ReportRow> rows;
  for (const auto& r : results) {
    if (r.ok()) rows.push_back(report::make_row(r.id, family, r.outcome));
  }
  return rows;
}

template <typename Fn>
int guarded(std::ostream& log, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError& e) {
    log << "error: " << e.what() << '\n';
    return e.code;
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kInternalError;
  }
}

}  // namespace

std::vector<perturb::ParamRange> parse_box(const std::string& text) {
  std::vector<perturb::ParamRange> box;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    part = trim(part);
    const auto colon = part.find(':');
    if (colon == std::string::npos) throw ConfigError("box range '" + part + "' must be lo:hi");
    box.push_back({parse_double(trim(part.substr(0, colon)), "box bound"),
                   parse_double(trim(part.substr(colon + 1)), "box bound")});
  }
  if (box.empty()) throw ConfigError("empty --box");
  return box;
}

perturb::PerturbationSpec RunConfig::perturbation_spec() const {
  const auto family = perturb::parse_family(perturbation);
  if (!family) throw ConfigError("unknown perturbation '" + perturbation + "'");
  auto spec = perturb::PerturbationSpec::defaults(*family, preset);
  if (box) spec.box = *box;
  spec.validate();
  return spec;
}

std::vector<std::pair<std::string, std::string>> read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected key=value");
    }
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

int cmd_certify(const RunConfig& config, std::ostream& log) {
  return guarded(log, [&] {
    const auto spec = config.perturbation_spec();
    config.verify.validate();
    auto inputs = load_inputs(config, log, true);
    const auto summary =
        certify_dataset(*inputs.model, inputs.data.items, spec, config.verify, config.workers);

    std::filesystem::create_directories(config.out);
    write_text(config.out / "certify.csv",
               csv_text(rows_for(summary.results, config.perturbation), config.timing));
    json j = report::summarize(summary.results);
    j["config"] = config_json(config, spec);
    j["dataset_issues"] = issues_json(inputs.data);
    write_text(config.out / "certify_summary.json", j.dump(2) + "\n");

    log << "certified " << summary.counts.certified << " / " << summary.counts.evaluated()
        << " images (" << summary.counts.failed << " failed); reports in " << config.out.string()
        << '\n';
    return static_cast<int>(kOk);
  });
}

int cmd_baseline(const RunConfig& config, std::ostream& log) {
  return guarded(log, [&] {
    const auto spec = config.perturbation_spec();
    config.verify.validate();
    if (config.grid_points == 1) throw ConfigError("--grid-points must be 0 (off) or at least 2");
    auto inputs = load_inputs(config, log, true);
    const auto& items = inputs.data.items;
    const Classifier& model = *inputs.model;
    const std::size_t workers = model.concurrent_safe() ? config.workers : 1;
    const auto& vc = config.verify;

    auto run_method = [&](auto&& evaluate) {
      std::vector<ImageResult> results(items.size());
      parallel_for(items.size(), workers, [&](std::size_t i) {
        results[i].id = items[i].id;
        try {
          results[i].outcome = evaluate(items[i]);
        } catch (const std::exception& e) {
          results[i].error = e.what();
        }
      });
      return results;
    };

    std::map<std::string, std::vector<ImageResult>> methods;
    if (config.ac_n > 0) {
      methods["ac"] = run_method([&](const LabeledImage& it) {
        return baselines::ac_certify(model, it.image, it.label, spec, config.ac_n, vc.tau, vc.delta,
                                     vc.seed, image_key(it));
      });
    }
    if (config.grid_points > 0) {
      methods["grid"] = run_method([&](const LabeledImage& it) {
        const auto start = std::chrono::steady_clock::now();
        auto o = baselines::to_outcome(baselines::grid_search(model, it.image, it.label, spec, config.grid_points));
        o.margin_d = margin(model.predict(it.image));
        o.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return o;
      });
    }
    if (config.rand_n > 0) {
      methods["random"] = run_method([&](const LabeledImage& it) {
        const auto start = std::chrono::steady_clock::now();
        RandomStream stream(hash_combine(hash_combine(vc.seed, image_key(it)), 0x52414e44ULL));
        auto o = baselines::to_outcome(
            baselines::random_search(model, it.image, it.label, spec, config.rand_n, stream));
        o.margin_d = margin(model.predict(it.image));
        o.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return o;
      });
    }

    std::filesystem::create_directories(config.out);
    json j;
    j["config"] = config_json(config, spec);
    j["config"]["ac_n"] = config.ac_n;
    j["config"]["grid_points"] = config.grid_points;
    j["config"]["rand_n"] = config.rand_n;
    j["dataset_issues"] = issues_json(inputs.data);
    for (const char* name : {"ac", "grid", "random"}) {
      const auto it = methods.find(name);
      if (it == methods.end()) {
        j["methods"][name] = json::object();
        continue;
      }
      write_text(config.out / (std::string("baseline_") + name + ".csv"),
                 csv_text(rows_for(it->second, config.perturbation), config.timing));
      j["methods"][name] = report::summarize(it->second);
      // Grid and Random are zero-tolerance adversaries.
      j["methods"][name]["tau"] = std::string(name) == "ac" ? vc.tau : 0.0;
    }
    write_text(config.out / "baseline_summary.json", j.dump(2) + "\n");
    log << "baselines written to " << config.out.string() << '\n';
    return static_cast<int>(kOk);
  });
}

int cmd_inspect(const RunConfig& config, std::ostream& out) {
  return guarded(out, [&] {
    auto inputs = load_inputs(config, out, false);
    const auto& d = inputs.descriptor;
    out << "model: " << d.source << '\n'
        << "  kind: " << to_string(d.kind) << '\n'
        << "  classes: " << d.num_classes << '\n'
        << "  input: " << to_string(d.input_shape) << '\n';
    if (const auto* net = dynamic_cast<const BuiltinNetwork*>(inputs.model.get())) {
      out << "  layers:";
      for (const auto& l : net->layers()) out << ' ' << l.cols << "->" << l.rows;
      out << '\n';
    }
    if (!config.dataset.empty()) {
      std::map<std::size_t, std::size_t> histogram;
      for (const auto& item : inputs.data.items) ++histogram[item.label];
      out << "dataset: " << config.dataset.string() << '\n'
          << "  images: " << inputs.data.items.size() << '\n'
          << "  skipped: " << inputs.data.issues.size() << '\n'
          << "  labels:";
      for (const auto& [label, count] : histogram) out << ' ' << label << '=' << count;
      out << '\n';
    }
    return static_cast<int>(kOk);
  });
}

namespace {

void add_common(CLI::App& cmd, RunConfig& c, std::string& box_text, std::string& preset_text) {
  cmd.add_option("--model", c.model, "Model: .nnw file, tcp://host:port, stdio:<command> or 'external'");
  cmd.add_option("--dataset", c.dataset, "Directory holding labels.tsv and .imt tensors");
  cmd.add_option("--perturbation", c.perturbation,
                 "rotation|translation|scaling|hue|saturation|brightness_contrast|gaussian_blur");
  cmd.add_option("--box", box_text, "Parameter ranges lo:hi[,lo:hi] in native units (radians for angles)");
  cmd.add_option("--preset", preset_text, "Default ranges: standard|alternative");
  cmd.add_option("--tau", c.verify.tau, "Tolerated failure probability");
  cmd.add_option("--delta", c.verify.delta, "Confidence complement");
  cmd.add_option("--n0", c.verify.n0, "Samples per batch");
  cmd.add_option("--nmax", c.verify.n_max, "Sample budget per image");
  cmd.add_option("--seed", c.verify.seed, "Run seed");
  cmd.add_option("--workers", c.workers, "Images evaluated in parallel");
  cmd.add_option("--out", c.out, "Output directory");
  cmd.add_flag("--timing", c.timing, "Record wall time per row in the CSV");
}

// Expands --config into flag tokens placed before the remaining arguments,
// so flags given on the command line win.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  if (args.empty()) return args;
  std::vector<std::string> rest;
  std::optional<std::string> path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw ConfigError("--config needs a file");
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  std::vector<std::string> out{args.front()};
  if (path) {
    for (const auto& [key, value] : read_config_file(*path)) out.push_back("--" + key + "=" + value);
  }
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Probabilistic robustness certification for black-box classifiers", "proa"};
  app.require_subcommand(1);

  RunConfig config;
  std::string box_text;
  std::string preset_text = "standard";

  auto* certify_cmd = app.add_subcommand("certify", "Adaptive certification of every dataset image");
  auto* baseline_cmd = app.add_subcommand("baseline", "Agresti-Coull, Grid and Random baselines");
  auto* inspect_cmd = app.add_subcommand("inspect", "Print model and dataset metadata");
  for (auto* cmd : {certify_cmd, baseline_cmd, inspect_cmd}) {
    cmd->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    add_common(*cmd, config, box_text, preset_text);
  }
  baseline_cmd->add_option("--ac-n", config.ac_n, "Agresti-Coull sample count (0 disables)");
  baseline_cmd->add_option("--grid-points", config.grid_points, "Grid points per dimension (0 disables)");
  baseline_cmd->add_option("--rand-n", config.rand_n, "Random adversary samples (0 disables)");

  std::vector<std::string> expanded;
  try {
    expanded = expand_config(args);
    std::vector<std::string> reversed(expanded.rbegin(), expanded.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    if (!box_text.empty()) config.box = parse_box(box_text);
    if (preset_text == "standard") {
      config.preset = perturb::BoxPreset::Standard;
    } else if (preset_text == "alternative") {
      config.preset = perturb::BoxPreset::Alternative;
    } else {
      throw ConfigError("unknown preset '" + preset_text + "'");
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }

  if (certify_cmd->parsed()) return cmd_certify(config, err);
  if (baseline_cmd->parsed()) return cmd_baseline(config, err);
  if (inspect_cmd->parsed()) return cmd_inspect(config, out);
  return kConfigError;
}

}  // namespace proa::cli
