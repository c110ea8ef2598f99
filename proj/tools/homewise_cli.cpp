// Command-line front end: one subcommand per pipeline stage.
//
// Exit codes: 0 success, 1 validation failure, 2 internal error. Failures
// print a JSON diagnostic {code, message, details} on stderr.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "homewise/batch.hpp"
#include "homewise/pipeline.hpp"
#include "homewise/service.hpp"

namespace hw = homewise;
namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config_path = "config.yaml";
  bool config_given = false;
  std::string input;
  std::string building;
  double area = 0.0;
  std::string out;
  std::uint64_t seed = 0;
  std::string format;
  std::string methods = "iqr,zscore,iforest,cusum";
  std::optional<double> led_factor;
  std::optional<double> insulation_factor;
  std::optional<double> setback;
  std::string kinds;
  std::string specs_path;
  std::string uploads;
  std::string root = ".";
  unsigned parallelism = 0;
  std::optional<int> port;
  std::string name;
};

hw::Config load_config(const Options& o) { return hw::load_config(o.config_path, o.config_given); }

hw::DatasetInput read_input(const Options& o) {
  hw::DatasetInput in;
  in.source_name = fs::path(o.input).filename().string();
  in.content = hw::read_text_file(o.input);
  if (!o.building.empty()) in.building_fields = hw::building_fields_from_json_text(hw::read_text_file(o.building));
  return in;
}

fs::path out_dir(const Options& o, const hw::Config& cfg) { return o.out.empty() ? fs::path(cfg.batch.exports_dir) : fs::path(o.out); }

void print_paths(const std::vector<fs::path>& paths) {
  hw::Json j = hw::Json::array();
  for (const auto& p : paths) j.push_back(p.string());
  std::cout << hw::Json{{"written", j}}.dump(2) << "\n";
}

std::string format_or(const Options& o, std::string fallback) { return o.format.empty() ? fallback : o.format; }

void require_format(const std::string& f, std::initializer_list<std::string_view> allowed) {
  for (auto a : allowed)
    if (f == a) return;
  throw hw::Error(hw::ErrorCode::UnknownFormat, "format not supported by this subcommand", {f});
}

int cmd_ingest(const Options& o) {
  const auto cfg = load_config(o);
  const auto in = read_input(o);
  const auto series = hw::prepare_series(in, cfg);
  const auto dir = out_dir(o, cfg);
  hw::write_text_file(dir / "cleaned.csv", hw::write_meter_csv(series.series));
  std::cout << hw::Json{{"pseudonym", series.pseudonym},
                        {"validation", hw::to_json(series.validation)},
                        {"cleaning", {{"filled_days", series.filled_days}, {"warnings", series.cleaning_warnings}}},
                        {"written", {(dir / "cleaned.csv").string()}}}
                   .dump(2)
            << "\n";
  return 0;
}

int cmd_profile(const Options& o) {
  const auto cfg = load_config(o);
  const auto in = read_input(o);
  hw::EnergyProfile p;
  if (!o.building.empty()) {
    const auto d = hw::prepare_dataset(in, cfg);
    p = hw::profile(d.series, d.building);
  } else {
    if (!(o.area > 0.0)) throw hw::Error(hw::ErrorCode::MissingRequired, "profile needs --area or --building", {"floor_area_m2"});
    p = hw::profile(hw::prepare_series(in, cfg).series, o.area);
  }
  const auto f = format_or(o, "csv");
  require_format(f, {"csv", "json"});
  const auto dir = out_dir(o, cfg);
  if (f == "csv") print_paths(hw::write_files(dir, {{"profile_monthly.csv", hw::profile_monthly_csv(p)}}));
  else print_paths(hw::write_files(dir, {{"profile.json", hw::to_json(p).dump(2) + "\n"}}));
  return 0;
}

int cmd_detect(const Options& o) {
  const auto cfg = load_config(o);
  const auto in = read_input(o);
  const auto methods = hw::parse_methods(o.methods);
  const auto flags = o.building.empty() ? hw::dataset_anomalies(hw::prepare_series(in, cfg), methods, o.seed, cfg)
                                        : hw::dataset_anomalies(hw::prepare_dataset(in, cfg), methods, o.seed, cfg);
  const auto f = format_or(o, "csv");
  require_format(f, {"csv", "json"});
  const auto dir = out_dir(o, cfg);
  if (f == "csv") print_paths(hw::write_files(dir, {{"anomalies.csv", hw::anomalies_csv(flags)}}));
  else print_paths(hw::write_files(dir, {{"anomalies.json", hw::to_json(flags).dump(2) + "\n"}}));
  return 0;
}

hw::PreparedDataset prepared_with_building(const Options& o, const hw::Config& cfg) {
  if (o.building.empty())
    throw hw::Error(hw::ErrorCode::MissingRequired, "this subcommand needs --building", {"building"});
  return hw::prepare_dataset(read_input(o), cfg);
}

int cmd_baseline(const Options& o) {
  const auto cfg = load_config(o);
  const auto d = prepared_with_building(o, cfg);
  const auto model = hw::dataset_baseline(d);
  require_format(format_or(o, "json"), {"json"});
  const hw::Json j{{"baseline", hw::to_json(model)},
                   {"monthly", hw::to_json(hw::predict_baseline(model, d.climate, d.building))},
                   {"loads", hw::to_json(hw::dataset_loads(d, model, cfg))}};
  print_paths(hw::write_files(out_dir(o, cfg), {{"baseline.json", j.dump(2) + "\n"}}));
  return 0;
}

std::vector<hw::ScenarioSpec> scenario_specs(const Options& o) {
  if (!o.specs_path.empty()) {
    const auto text = hw::read_text_file(o.specs_path);
    hw::Json j;
    try {
      j = hw::Json::parse(text);
    } catch (const hw::Json::parse_error& e) {
      throw hw::Error(hw::ErrorCode::InvalidArgument, "scenario spec file is not valid JSON", {e.what()});
    }
    return hw::scenario_specs_from_json(j);
  }
  std::vector<hw::ScenarioKind> kinds;
  if (o.kinds.empty()) {
    for (auto k : hw::all_enum_values<hw::ScenarioKind>()) kinds.push_back(k);
  } else {
    std::string_view rest = o.kinds;
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const auto token = hw::detail::trim(rest.substr(0, comma));
      const auto k = hw::enum_from_string<hw::ScenarioKind>(token);
      if (!k) throw hw::Error(hw::ErrorCode::InvalidArgument, "unknown scenario kind", {std::string(token)});
      kinds.push_back(*k);
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    }
  }
  std::vector<hw::ScenarioSpec> specs;
  for (auto k : kinds) {
    hw::ScenarioSpec s{k, std::nullopt, std::nullopt, std::nullopt};
    if (k == hw::ScenarioKind::LedRetrofit) s.factor = o.led_factor;
    if (k == hw::ScenarioKind::InsulationUpgrade) s.factor = o.insulation_factor;
    if (k == hw::ScenarioKind::ThermostatSetback) s.setback_degc = o.setback;
    specs.push_back(s);
  }
  return specs;
}

int cmd_scenario(const Options& o) {
  const auto cfg = load_config(o);
  const auto specs = scenario_specs(o);
  const auto d = prepared_with_building(o, cfg);
  const auto methods = hw::all_anomaly_methods();
  const auto flags = hw::dataset_anomalies(d, methods, o.seed, cfg);
  const auto outcome = hw::dataset_scenarios(d, specs, flags, cfg);
  const auto f = format_or(o, "csv");
  require_format(f, {"csv", "json"});
  const auto dir = out_dir(o, cfg);
  if (f == "csv") {
    print_paths(hw::write_files(dir, {{"scenarios.csv", hw::scenarios_csv(outcome.table)}}));
  } else {
    hw::Json results = hw::Json::array();
    for (const auto& r : outcome.results) results.push_back(hw::to_json(r));
    const auto recs = hw::to_json(outcome.recommendations);
    const hw::Json j{{"scenarios", results},
                     {"comparison", hw::to_json(outcome.table)},
                     {"recommendations", recs["recommendations"]},
                     {"advisories", recs["advisories"]}};
    print_paths(hw::write_files(dir, {{"scenarios.json", j.dump(2) + "\n"}}));
  }
  return 0;
}

int cmd_report(const Options& o) {
  const auto cfg = load_config(o);
  const auto format = hw::parse_export_format(format_or(o, "html"));
  const auto d = prepared_with_building(o, cfg);
  const auto bundle = hw::analyze_dataset(d, cfg, o.seed);
  print_paths(hw::write_report(bundle, out_dir(o, cfg), format));
  return 0;
}

int cmd_batch(const Options& o) {
  const auto cfg = load_config(o);
  const fs::path root = o.root;
  const fs::path uploads = o.uploads.empty() ? root / cfg.batch.uploads_dir : fs::path(o.uploads);
  const auto scan = hw::scan_uploads(uploads);
  const auto result = hw::run_batch(scan.datasets, cfg, o.seed, o.parallelism);
  hw::persist_batch(result, hw::OutputDirs::from(cfg, root));
  hw::Json skipped = hw::Json::array();
  for (const auto& s : scan.skipped) skipped.push_back({{"name", s.name}, {"reason", s.reason}});
  std::cout << hw::Json{{"job", hw::to_json(result.job)}, {"skipped", skipped}, {"summary", hw::to_json(result.summary)}}
                   .dump(2)
            << "\n";
  return 0;
}

int cmd_serve(const Options& o) {
  auto cfg = load_config(o);
  if (o.port) cfg.server.port = *o.port;
  hw::ApiServer server(cfg, o.root);
  std::cerr << "listening on " << server.host() << ":" << cfg.server.port << "\n";
  if (!server.listen()) throw hw::Error(hw::ErrorCode::IoFailure, "cannot listen on the configured port");
  return 0;
}

int cmd_delete(const Options& o) {
  const auto cfg = load_config(o);
  const fs::path root = o.root;
  const fs::path uploads = o.uploads.empty() ? root / cfg.batch.uploads_dir : fs::path(o.uploads);
  hw::delete_dataset(o.name, uploads, hw::OutputDirs::from(cfg, root));
  std::cout << hw::Json{{"deleted", o.name}}.dump(2) << "\n";
  return 0;
}

int fail(const hw::Error& e) {
  std::cerr << hw::to_json(e).dump() << "\n";
  return hw::is_validation_error(e.code()) ? 1 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"homewise: household energy analytics"};
  app.require_subcommand(1);
  Options o;
  auto* config_opt = app.add_option("--config", o.config_path, "Config file (default ./config.yaml)");

  auto input = [&](CLI::App* sub) { sub->add_option("--input,-i", o.input, "Meter data (CSV or JSON)")->required(); };
  auto building = [&](CLI::App* sub, bool required) {
    auto* opt = sub->add_option("--building,-b", o.building, "Building descriptor (JSON object)");
    if (required) opt->required();
  };
  auto out = [&](CLI::App* sub) { sub->add_option("--out,-o", o.out, "Output directory (default exports/)"); };
  auto seed = [&](CLI::App* sub) { sub->add_option("--seed", o.seed, "Random seed"); };
  auto format = [&](CLI::App* sub, const char* help) { sub->add_option("--format", o.format, help); };

  auto* ingest = app.add_subcommand("ingest", "Validate and clean meter data");
  input(ingest);
  out(ingest);

  auto* prof = app.add_subcommand("profile", "Consumption profile");
  input(prof);
  building(prof, false);
  prof->add_option("--area", o.area, "Floor area in m2 when no descriptor is given");
  out(prof);
  format(prof, "csv|json");

  auto* detect = app.add_subcommand("detect", "Anomaly detection");
  input(detect);
  building(detect, false);
  detect->add_option("--methods", o.methods, "Comma-separated: iqr,zscore,iforest,cusum");
  seed(detect);
  out(detect);
  format(detect, "csv|json");

  auto* base = app.add_subcommand("baseline", "Fit the consumption baseline");
  input(base);
  building(base, true);
  out(base);
  format(base, "json");

  auto* scen = app.add_subcommand("scenario", "Retrofit and behaviour scenarios");
  input(scen);
  building(scen, true);
  scen->add_option("--led-factor", o.led_factor, "LED lighting reduction factor (0.60-0.75)");
  scen->add_option("--insulation-factor", o.insulation_factor, "Insulation heating reduction factor (0.10-0.30)");
  scen->add_option("--setback", o.setback, "Thermostat setback in degC (0.5-3.0)");
  scen->add_option("--kinds", o.kinds, "Comma-separated scenario kinds (default all)");
  scen->add_option("--specs", o.specs_path, "JSON file with a list of scenario specs");
  seed(scen);
  out(scen);
  format(scen, "csv|json");

  auto* rep = app.add_subcommand("report", "Full report bundle");
  input(rep);
  building(rep, true);
  seed(rep);
  out(rep);
  format(rep, "html|json|csv");

  auto* batch = app.add_subcommand("batch", "Process every dataset in the uploads directory");
  batch->add_option("--uploads", o.uploads, "Uploads directory (default <root>/uploads)");
  batch->add_option("--root", o.root, "Directory holding uploads/, exports/ and results/");
  batch->add_option("--parallelism,-j", o.parallelism, "Worker count (default: config, then cores)");
  seed(batch);

  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  serve->add_option("--root", o.root, "Directory holding uploads/, exports/ and results/");
  serve->add_option("--port", o.port, "Port (default from config)");

  auto* del = app.add_subcommand("delete", "Delete an uploaded dataset and its results");
  del->add_option("--name", o.name, "Dataset file name inside uploads/")->required();
  del->add_option("--uploads", o.uploads, "Uploads directory (default <root>/uploads)");
  del->add_option("--root", o.root, "Directory holding uploads/, exports/ and results/");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(hw::Error(hw::ErrorCode::InvalidArgument, e.what()));
  }
  o.config_given = config_opt->count() > 0;

  try {
    if (ingest->parsed()) return cmd_ingest(o);
    if (prof->parsed()) return cmd_profile(o);
    if (detect->parsed()) return cmd_detect(o);
    if (base->parsed()) return cmd_baseline(o);
    if (scen->parsed()) return cmd_scenario(o);
    if (rep->parsed()) return cmd_report(o);
    if (batch->parsed()) return cmd_batch(o);
    if (serve->parsed()) return cmd_serve(o);
    if (del->parsed()) return cmd_delete(o);
  } catch (const hw::Error& e) {
    return fail(e);
  } catch (const std::exception& e) {
    return fail(hw::Error(hw::ErrorCode::Internal, e.what()));
  }
  return 0;
}
