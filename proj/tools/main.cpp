/*
 * Copyright 2026 The nextround authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <filesystem>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nextround/ingest.hpp"
#include "nextround/metrics.hpp"
#include "nextround/model_io.hpp"
#include "nextround/portfolio.hpp"
#include "nextround/sample_io.hpp"
#include "nextround/shap.hpp"
#include "nextround/synth.hpp"
#include "nextround/tune.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace nextround;

namespace {

// exit codes: 0 ok, 1 usage, 2 data error, 3 internal
constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

struct CommonOpts {
  uint64_t seed = 0;
  int threads = 1;
};

void write_snapshot(const std::string& anchor, const json& resolved) {
  fs::path p(anchor);
  fs::path out = fs::is_directory(p) ? p / "run_config.json" : fs::path(anchor + ".run.json");
  write_text_file(out.string(), resolved.dump(2) + "\n");
}

EntityStore load_filtered(const std::string& data_dir, LoadReport* load_rep = nullptr,
                          FilterReport* filter_rep = nullptr) {
  EntityStore raw = load_export(data_dir, load_rep);
  return filter_companies(raw, filter_rep);
}

json parse_param_overrides(const std::vector<std::string>& pairs) {
  json o = json::object();
  for (const auto& kv : pairs) {
    auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("bad --param (expected key=value): " + kv);
    const std::string key = kv.substr(0, eq);
    const std::string value = kv.substr(eq + 1);
    try {
      o[key] = json::parse(value);  // numbers and booleans
    } catch (const json::parse_error&) {
      o[key] = value;  // plain string
    }
  }
  return o;
}

SynthConfig synth_config_from_json(const json& j) {
  SynthConfig cfg;
  if (j.contains("n_companies")) cfg.n_companies = j.at("n_companies").get<size_t>();
  if (j.contains("n_investors")) cfg.n_investors = j.at("n_investors").get<size_t>();
  if (j.contains("n_founders")) cfg.n_founders = j.at("n_founders").get<size_t>();
  if (j.contains("first_founding_year"))
    cfg.first_founding_year = j.at("first_founding_year").get<int>();
  if (j.contains("last_founding_year"))
    cfg.last_founding_year = j.at("last_founding_year").get<int>();
  if (j.contains("n_provinces")) cfg.n_provinces = j.at("n_provinces").get<size_t>();
  if (j.contains("cities_per_province"))
    cfg.cities_per_province = j.at("cities_per_province").get<size_t>();
  if (j.contains("n_industries")) cfg.n_industries = j.at("n_industries").get<size_t>();
  if (j.contains("target_success_rate"))
    cfg.target_success_rate = j.at("target_success_rate").get<double>();
  if (j.contains("window_rates")) cfg.window_rates = j.at("window_rates").get<std::vector<double>>();
  if (j.contains("fixed_intercept")) cfg.fixed_intercept = j.at("fixed_intercept").get<double>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<uint64_t>();
  if (j.contains("missing")) {
    const auto& m = j.at("missing");
    if (m.contains("area")) cfg.missing.area = m.at("area").get<double>();
    if (m.contains("industries")) cfg.missing.industries = m.at("industries").get<double>();
    if (m.contains("amounts")) cfg.missing.amounts = m.at("amounts").get<double>();
    if (m.contains("investors")) cfg.missing.investors = m.at("investors").get<double>();
    if (m.contains("founders")) cfg.missing.founders = m.at("founders").get<double>();
    if (m.contains("informative")) cfg.missing.informative = m.at("informative").get<bool>();
  }
  if (j.contains("effects")) {
    for (const auto& [name, e] : j.at("effects").items()) {
      bool found = false;
      for (size_t f = 0; f < kNumFactors; ++f) {
        if (factor_names()[f] != name) continue;
        if (e.contains("coef")) cfg.effects[f].coef = e.at("coef").get<double>();
        if (e.contains("center")) cfg.effects[f].center = e.at("center").get<double>();
        if (e.contains("scale")) cfg.effects[f].scale = e.at("scale").get<double>();
        found = true;
      }
      if (!found) throw std::invalid_argument("unknown factor in effects: " + name);
    }
  }
  return cfg;
}

int cmd_synth(const std::string& config_path, const std::string& out_dir, CommonOpts common,
              bool seed_given) {
  SynthConfig cfg;
  json resolved = json::object();
  if (!config_path.empty()) {
    resolved = json::parse(read_text_file(config_path));
    cfg = synth_config_from_json(resolved);
  }
  if (seed_given) cfg.seed = common.seed;
  resolved["seed"] = cfg.seed;
  SynthResult result = generate(cfg);
  emit_export(result.store, out_dir);
  write_text_file(out_dir + "/ground_truth.csv", ground_truth_csv(result.truth));
  write_snapshot(out_dir, json{{"command", "synth"}, {"config", resolved}, {"out", out_dir}});
  std::cout << "synth: " << result.store.companies().size() << " companies, "
            << result.store.rounds().size() << " rounds, " << result.truth.size()
            << " labeled sample events -> " << out_dir << "\n";
  return kExitOk;
}

int cmd_ingest(const std::string& data_dir, const std::string& report_path,
               const std::string& intervals_path) {
  LoadReport load_rep;
  FilterReport filter_rep;
  EntityStore store = load_filtered(data_dir, &load_rep, &filter_rep);
  IntervalStats stats = round_interval_stats(store);
  json report{{"load", load_rep.to_json()},
              {"filter", filter_rep.to_json()},
              {"companies_after_filter", store.companies().size()},
              {"rounds_after_filter", store.rounds().size()}};
  write_text_file(report_path, report.dump(2) + "\n");
  if (!intervals_path.empty()) write_text_file(intervals_path, interval_stats_csv(stats));
  write_snapshot(report_path,
                 json{{"command", "ingest"}, {"data", data_dir}, {"report", report_path},
                      {"intervals", intervals_path}});
  std::cout << "ingest: " << store.companies().size() << " companies after filter, "
            << load_rep.warnings() << " load warnings\n"
            << interval_stats_csv(stats);
  return kExitOk;
}

int cmd_windows(const std::string& data_dir, const std::string& out_path,
                const std::string& dist_path) {
  EntityStore store = load_filtered(data_dir);
  auto windows = window_schedule();
  auto samples = build_samples(store, windows);
  write_text_file(out_path, samples_csv(samples));
  const std::string dist = label_distribution_csv(label_distribution(samples, windows));
  if (!dist_path.empty()) write_text_file(dist_path, dist);
  write_snapshot(out_path, json{{"command", "windows"}, {"data", data_dir}, {"out", out_path},
                                {"dist", dist_path}});
  std::cout << "windows: " << samples.size() << " sample events\n" << dist;
  return kExitOk;
}

int cmd_features(const std::string& data_dir, const std::string& samples_path,
                 const std::string& out_path, const std::string& dict_path, bool per_deal,
                 CommonOpts common) {
  EntityStore store = load_filtered(data_dir);
  LoadedSamples loaded = load_samples_csv(samples_path);
  // recover company indices against this store
  std::vector<SampleEvent> samples = loaded.samples;
  for (auto& s : samples) {
    auto idx = store.company_index(s.company_id);
    if (!idx) throw std::runtime_error("sample references unknown company " + s.company_id);
    s.company_index = *idx;
  }
  FeatureConfig cfg;
  cfg.investor_fractions_per_deal = per_deal;
  cfg.threads = common.threads;
  Dataset d = feature_matrix(store, samples, cfg);
  write_text_file(out_path, samples_csv(samples, &d));
  if (!dict_path.empty()) write_text_file(dict_path, factor_dictionary().dump(2) + "\n");
  write_snapshot(out_path, json{{"command", "features"},
                                {"data", data_dir},
                                {"samples", samples_path},
                                {"out", out_path},
                                {"dict", dict_path},
                                {"investor_fractions_per_deal", per_deal},
                                {"threads", common.threads}});
  std::cout << "features: " << d.n_rows() << " rows x " << d.n_features() << " factors\n";
  return kExitOk;
}

int cmd_train(const std::string& features_path, const std::string& family,
              const std::string& strategy, double split_ratio, const std::string& out_path,
              const std::string& test_out, const std::string& log_path,
              const std::vector<std::string>& params, CommonOpts common) {
  LoadedSamples loaded = load_samples_csv(features_path);
  const auto split = split_train_test(loaded.samples.size(), split_ratio, common.seed);

  Dataset train;
  train.feature_names = loaded.features.feature_names;
  std::vector<SampleEvent> test_samples;
  Dataset test;
  test.feature_names = loaded.features.feature_names;
  for (size_t i : split.train) train.add_row(loaded.features.row(i), loaded.features.labels[i]);
  for (size_t i : split.test) {
    test.add_row(loaded.features.row(i), loaded.features.labels[i]);
    test_samples.push_back(loaded.samples[i]);
  }

  TrainSpec spec;
  spec.family = family;
  spec.strategy = parse_strategy(strategy);
  spec.overrides = parse_param_overrides(params);
  spec.seed = common.seed;
  spec.threads = common.threads;
  AnyModel model = train_model(train, spec);
  save_model(model, out_path);
  if (!test_out.empty()) write_text_file(test_out, samples_csv(test_samples, &test));

  json log{{"family", family},
           {"strategy", strategy},
           {"seed", common.seed},
           {"n_train", train.n_rows()},
           {"n_train_positive", train.positives()},
           {"n_test", test.n_rows()},
           {"overrides", spec.overrides}};
  if (const auto* gbdt = model.as_gbdt()) log["train_loss"] = gbdt->train_loss;
  if (!log_path.empty()) write_text_file(log_path, log.dump(2) + "\n");
  write_snapshot(out_path, json{{"command", "train"},
                                {"features", features_path},
                                {"model", family},
                                {"strategy", strategy},
                                {"split", split_ratio},
                                {"seed", common.seed},
                                {"threads", common.threads},
                                {"params", spec.overrides},
                                {"out", out_path},
                                {"test_out", test_out}});
  std::cout << "train: " << family << "/" << strategy << " on " << train.n_rows()
            << " rows -> " << out_path << "\n";
  return kExitOk;
}

int cmd_eval(const std::vector<std::string>& model_paths, const std::string& test_path,
             const std::string& out_dir, double threshold) {
  LoadedSamples loaded = load_samples_csv(test_path);
  fs::create_directories(out_dir);
  std::vector<ResultRow> rows;
  for (const auto& path : model_paths) {
    AnyModel model = load_model(path);
    std::vector<double> probs = model.predict_all(loaded.features);
    Metrics m = score_metrics(probs, loaded.features.labels, threshold);
    double auc = 0;
    bool have_auc = false;
    try {
      RocCurve curve = roc(probs, loaded.features.labels);
      auc = curve.auc;
      have_auc = true;
      write_text_file(out_dir + "/roc_" + model.family + "_" + model.strategy + ".csv",
                      roc_csv(curve));
    } catch (const std::invalid_argument&) {
      // single-class test set: no ROC
    }
    json mj = m.to_json();
    mj["model"] = model.family;
    mj["strategy"] = model.strategy;
    if (have_auc) mj["auc"] = auc;
    write_text_file(out_dir + "/metrics_" + model.family + "_" + model.strategy + ".json",
                    mj.dump(2) + "\n");
    rows.push_back(ResultRow{model.family, model.strategy, m, auc});
    std::cout << "eval: " << model.family << "/" << model.strategy << " precision "
              << m.precision << " recall " << m.recall << " f1 " << m.f1 << "\n";
  }
  write_text_file(out_dir + "/comparison.csv", results_csv(rows));
  write_snapshot(out_dir, json{{"command", "eval"},
                               {"models", model_paths},
                               {"test", test_path},
                               {"threshold", threshold},
                               {"out", out_dir}});
  return kExitOk;
}

int cmd_windows_study(const std::string& data_dir, const std::string& mode,
                      const std::string& out_path, const std::string& strategy,
                      const std::vector<std::string>& params, CommonOpts common) {
  EntityStore store = load_filtered(data_dir);
  auto windows = window_schedule();
  auto samples = build_samples(store, windows);
  Dataset all = feature_matrix(store, samples, FeatureConfig{false, common.threads});

  const StudyProtocol protocol =
      mode == "in-sample" ? StudyProtocol::InSample : StudyProtocol::OutOfSample;
  const json overrides = parse_param_overrides(params);

  auto subset = [&](const std::vector<size_t>& idx) {
    Dataset d;
    d.feature_names = all.feature_names;
    for (size_t i : idx) d.add_row(all.row(i), all.labels[i]);
    return d;
  };

  std::string csv = "window_index,t_s,n_train_single,n_train_multiple,f1_single,f1_multiple\n";
  const int first = protocol == StudyProtocol::InSample ? 0 : 1;
  for (int w = first; w < static_cast<int>(windows.size()); ++w) {
    WindowStudySets single, multiple;
    try {
      single = window_study_sets(samples, w, WindowMode::Single, protocol, 0.9, common.seed);
      multiple = window_study_sets(samples, w, WindowMode::Multiple, protocol, 0.9, common.seed);
    } catch (const std::exception&) {
      continue;  // window without samples
    }
    if (single.test.empty() || single.train.empty() || multiple.train.empty()) continue;
    auto run = [&](const WindowStudySets& sets) -> double {
      TrainSpec spec;
      spec.family = "gbdt-lgbm";
      spec.strategy = parse_strategy(strategy);
      spec.overrides = overrides;
      spec.seed = common.seed;
      spec.threads = common.threads;
      Dataset train = subset(sets.train);
      if (train.positives() == 0 || train.positives() == train.n_rows()) return 0.0;
      AnyModel model = train_model(train, spec);
      Dataset test = subset(sets.test);
      Metrics m = score_metrics(model.predict_all(test), test.labels, 0.5);
      return m.f1;
    };
    const double f1_single = run(single);
    const double f1_multiple = run(multiple);
    write_csv_row(csv, {std::to_string(w), to_string(windows[static_cast<size_t>(w)].t_s),
                        std::to_string(single.train.size()),
                        std::to_string(multiple.train.size()), format_double(f1_single),
                        format_double(f1_multiple)});
  }
  write_text_file(out_path, csv);
  write_snapshot(out_path, json{{"command", "windows-study"},
                                {"data", data_dir},
                                {"mode", mode},
                                {"strategy", strategy},
                                {"seed", common.seed},
                                {"params", parse_param_overrides(params)},
                                {"out", out_path}});
  std::cout << csv;
  return kExitOk;
}

int cmd_explain(const std::string& model_path, const std::string& data_dir,
                const std::string& company_id, const std::string& asof_str,
                const std::string& out_dir) {
  AnyModel model = load_model(model_path);
  const GbdtModel* gbdt = model.as_gbdt();
  if (!gbdt)
    throw std::runtime_error("explain: attribution is supported for gbdt models only (got " +
                             model.family + ")");
  auto asof = parse_date(asof_str);
  if (!asof) throw std::runtime_error("explain: bad --asof date " + asof_str);
  EntityStore store = load_filtered(data_dir);
  auto idx = store.company_index(company_id);
  if (!idx) throw std::runtime_error("explain: unknown company " + company_id);

  auto x = compute_factors(store, *idx, *asof);
  std::vector<double> row(x.begin(), x.end());
  if (model.impute_medians) {
    for (size_t j = 0; j < row.size(); ++j)
      if (is_missing(row[j])) row[j] = (*model.impute_medians)[j];
  }
  ExplainReport rep = explain_report(*gbdt, row);
  fs::create_directories(out_dir);
  write_text_file(out_dir + "/attribution.csv", attribution_csv(rep));
  write_text_file(out_dir + "/attribution.json", attribution_json(rep).dump(2) + "\n");
  const std::string text = attribution_text(rep);
  write_text_file(out_dir + "/attribution.txt", text);

  // model-level gain importance, sorted descending
  auto importance = gain_importance(*gbdt);
  std::vector<size_t> order(importance.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return importance[a] > importance[b]; });
  std::string imp_csv = "factor,gain_importance\n";
  for (size_t j : order)
    write_csv_row(imp_csv, {gbdt->feature_names[j], format_double(importance[j])});
  write_text_file(out_dir + "/importance.csv", imp_csv);
  write_snapshot(out_dir, json{{"command", "explain"},
                               {"model", model_path},
                               {"data", data_dir},
                               {"company", company_id},
                               {"asof", asof_str},
                               {"out", out_dir}});
  std::cout << company_id << " as of " << asof_str << "\n" << text;
  return kExitOk;
}

int cmd_portfolio(const std::string& model_path, const std::string& data_dir,
                  const std::string& asof_str, size_t k, const std::string& stage_str,
                  const std::string& out_dir) {
  AnyModel model = load_model(model_path);
  auto asof = parse_date(asof_str);
  if (!asof) throw std::runtime_error("portfolio: bad --asof date " + asof_str);
  EntityStore store = load_filtered(data_dir);
  const TimeWindow window = make_window(*asof);

  std::optional<Stage> stage;
  if (!stage_str.empty()) {
    if (stage_str == "before-a") stage = Stage::BeforeSeriesA;
    else if (stage_str == "a") stage = Stage::SeriesA;
    else if (stage_str == "b") stage = Stage::SeriesB;
    else throw std::runtime_error("portfolio: unknown stage " + stage_str);
  }

  std::vector<ScoredCompany> scored;
  std::map<std::string, int> labels;
  std::vector<size_t> candidates;
  const StageMap stage_map = default_stage_map();
  for (size_t c = 0; c < store.companies().size(); ++c) {
    if (!eligible(store, c, window.t_s)) continue;
    if (stage) {
      auto s = classify_stage(store, c, window.t_s, stage_map);
      if (!s || *s != *stage) continue;
    }
    auto x = compute_factors(store, c, window.t_s);
    scored.push_back(ScoredCompany{store.companies()[c].id, model.predict(x)});
    labels[store.companies()[c].id] = success_label(store, c, window);
    candidates.push_back(c);
  }
  if (scored.empty()) throw std::runtime_error("portfolio: no eligible candidates at " + asof_str);
  if (k > scored.size()) k = scored.size();

  Portfolio portfolio = construct(scored, k, window.t_s);
  std::vector<size_t> ks;
  for (size_t kk = 1; kk <= scored.size(); kk = kk < 10 ? kk + 1 : kk + std::max<size_t>(1, scored.size() / 50))
    ks.push_back(kk);
  SuccessCurve curve = success_curve(scored, labels, ks);

  std::vector<PortfolioRow> rows;
  for (size_t rank = 0; rank < portfolio.entries.size(); ++rank) {
    const auto& entry = portfolio.entries[rank];
    const size_t c = *store.company_index(entry.company_id);
    PortfolioRow row;
    row.rank = rank + 1;
    row.company_id = entry.company_id;
    row.name = store.companies()[c].name;
    row.probability = entry.probability;
    auto last = last_round_before(store, c, window.t_s);
    row.last_deal = last ? std::string(round_type_name(store.rounds()[*last].type)) + " " +
                               to_string(store.rounds()[*last].announced)
                         : "none";
    row.first_deal_in_window = detail::describe_first_event_in_window(store, c, window);
    row.label = labels[entry.company_id];
    rows.push_back(std::move(row));
  }

  fs::create_directories(out_dir);
  write_text_file(out_dir + "/portfolio.csv", portfolio_csv(rows));
  write_text_file(out_dir + "/success_curve.csv", success_curve_csv(curve));
  write_snapshot(out_dir, json{{"command", "portfolio"},
                               {"model", model_path},
                               {"data", data_dir},
                               {"asof", asof_str},
                               {"k", k},
                               {"stage", stage_str},
                               {"out", out_dir}});
  size_t successes = 0;
  for (const auto& row : rows) successes += row.label;
  std::cout << "portfolio: top-" << k << " of " << scored.size() << " candidates, " << successes
            << " realized successes\n"
            << portfolio_csv(rows);
  return kExitOk;
}

ParamSpace default_space(const std::string& family) {
  ParamSpace space;
  if (family == "logreg") {
    space["l2"] = ParamRange{1e-6, 1.0, true, false};
    space["learning_rate"] = ParamRange{0.01, 1.0, true, false};
  } else if (family == "knn") {
    space["k"] = ParamRange{3, 50, false, true};
  } else if (family == "cart") {
    space["max_depth"] = ParamRange{2, 20, false, true};
  } else if (family == "forest") {
    space["n_estimators"] = ParamRange{20, 150, false, true};
    space["max_depth"] = ParamRange{4, 63, false, true};
  } else if (family.rfind("gbdt", 0) == 0) {
    space["n_estimators"] = ParamRange{20, 300, false, true};
    space["max_depth"] = ParamRange{3, 11, false, true};
    space["learning_rate"] = ParamRange{0.02, 0.4, true, false};
    space["lambda_l2"] = ParamRange{0.1, 5.0, true, false};
  } else if (family == "softtree") {
    space["depth"] = ParamRange{2, 6, false, true};
    space["learning_rate"] = ParamRange{1e-3, 0.1, true, false};
  } else if (family == "mlp") {
    space["hidden"] = ParamRange{8, 64, false, true};
    space["learning_rate"] = ParamRange{1e-4, 1e-2, true, false};
  } else {
    throw std::invalid_argument("tune: unknown model family " + family);
  }
  return space;
}

int cmd_tune(const std::string& features_path, const std::string& family,
             const std::string& strategy, int budget, const std::string& out_path,
             const std::string& log_path, CommonOpts common) {
  LoadedSamples loaded = load_samples_csv(features_path);
  const auto split = split_train_test(loaded.samples.size(), 0.9, common.seed);
  Dataset train, val;
  train.feature_names = loaded.features.feature_names;
  val.feature_names = loaded.features.feature_names;
  for (size_t i : split.train) train.add_row(loaded.features.row(i), loaded.features.labels[i]);
  for (size_t i : split.test) val.add_row(loaded.features.row(i), loaded.features.labels[i]);

  ParamSpace space = default_space(family);
  TuneResult result = tune(space, budget, common.seed, [&](const ParamPoint& point) {
    TrainSpec spec;
    spec.family = family;
    spec.strategy = parse_strategy(strategy);
    spec.seed = common.seed;
    spec.threads = common.threads;
    for (const auto& [k, v] : point) spec.overrides[k] = v;
    AnyModel model = train_model(train, spec);
    Metrics m = score_metrics(model.predict_all(val), val.labels, 0.5);
    return m.f1;
  });

  json best{{"family", family},
            {"strategy", strategy},
            {"budget", budget},
            {"seed", common.seed},
            {"best_score", result.best_score},
            {"best_params", result.best}};
  write_text_file(out_path, best.dump(2) + "\n");
  if (!log_path.empty()) write_text_file(log_path, trial_log_csv(result));
  write_snapshot(out_path, json{{"command", "tune"},
                                {"features", features_path},
                                {"model", family},
                                {"strategy", strategy},
                                {"budget", budget},
                                {"seed", common.seed},
                                {"out", out_path}});
  std::cout << "tune: best validation f1 " << result.best_score << " -> " << out_path << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"startup success prediction pipeline"};
  app.require_subcommand(1);
  app.set_config("--config-file");

  CommonOpts common;
  app.add_option("--seed", common.seed, "master random seed")->capture_default_str();
  app.add_option("--threads", common.threads, "worker threads for parallel stages")
      ->capture_default_str();

  // synth
  std::string synth_config, synth_out;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic export directory");
  synth_cmd->add_option("--config", synth_config, "generator config JSON");
  synth_cmd->add_option("--out", synth_out, "output directory")->required();

  // ingest
  std::string ingest_data, ingest_report, ingest_intervals;
  auto* ingest_cmd = app.add_subcommand("ingest", "load + filter an export, report interval stats");
  ingest_cmd->add_option("--data", ingest_data, "export directory")->required();
  ingest_cmd->add_option("--report", ingest_report, "load/filter report JSON")->required();
  ingest_cmd->add_option("--intervals", ingest_intervals, "interval stats CSV");

  // windows
  std::string windows_data, windows_out, windows_dist;
  auto* windows_cmd = app.add_subcommand("windows", "build labeled sample events");
  windows_cmd->add_option("--data", windows_data, "export directory")->required();
  windows_cmd->add_option("--out", windows_out, "samples CSV")->required();
  windows_cmd->add_option("--dist", windows_dist, "label distribution CSV");

  // features
  std::string feat_data, feat_samples, feat_out, feat_dict;
  bool feat_per_deal = false;
  auto* features_cmd = app.add_subcommand("features", "fill factor columns for sample events");
  features_cmd->add_option("--data", feat_data, "export directory")->required();
  features_cmd->add_option("--samples", feat_samples, "samples CSV from `windows`")->required();
  features_cmd->add_option("--out", feat_out, "feature CSV")->required();
  features_cmd->add_option("--dict", feat_dict, "factor dictionary JSON");
  features_cmd->add_flag("--per-deal-investor-fractions", feat_per_deal,
                         "count investor track records per deal instead of per company");

  // train
  std::string train_features, train_family, train_strategy = "none", train_out, train_test_out,
              train_log;
  double train_split = 0.9;
  std::vector<std::string> train_params;
  auto* train_cmd = app.add_subcommand("train", "train one model family");
  train_cmd->add_option("--features", train_features, "feature CSV")->required();
  train_cmd
      ->add_option("--model", train_family,
                   "logreg|knn|cart|forest|gbdt-xgb|gbdt-lgbm|softtree|mlp")
      ->required();
  train_cmd->add_option("--strategy", train_strategy, "none|smote|weight")
      ->capture_default_str();
  train_cmd->add_option("--split", train_split, "train fraction")->capture_default_str();
  train_cmd->add_option("--out", train_out, "model JSON")->required();
  train_cmd->add_option("--test-out", train_test_out, "held-out test CSV");
  train_cmd->add_option("--log", train_log, "training log JSON");
  train_cmd->add_option("--param", train_params, "family parameter override key=value");

  // eval
  std::vector<std::string> eval_models;
  std::string eval_test, eval_out;
  double eval_threshold = 0.5;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate trained models on a test CSV");
  eval_cmd->add_option("--model", eval_models, "model JSON (repeatable)")->required();
  eval_cmd->add_option("--test", eval_test, "test CSV")->required();
  eval_cmd->add_option("--out", eval_out, "output directory")->required();
  eval_cmd->add_option("--threshold", eval_threshold, "classification threshold")
      ->capture_default_str();

  // windows-study
  std::string study_data, study_mode, study_out, study_strategy = "weight";
  std::vector<std::string> study_params;
  auto* study_cmd =
      app.add_subcommand("windows-study", "single vs multiple window training comparison");
  study_cmd->add_option("--data", study_data, "export directory")->required();
  study_cmd->add_option("--mode", study_mode, "in-sample|out-of-sample")
      ->required()
      ->check(CLI::IsMember({"in-sample", "out-of-sample"}));
  study_cmd->add_option("--out", study_out, "study CSV")->required();
  study_cmd->add_option("--strategy", study_strategy, "none|smote|weight")
      ->capture_default_str();
  study_cmd->add_option("--param", study_params, "gbdt parameter override key=value");

  // explain
  std::string explain_model, explain_data, explain_company, explain_asof, explain_out;
  auto* explain_cmd = app.add_subcommand("explain", "per-prediction factor attribution");
  explain_cmd->add_option("--model", explain_model, "model JSON (gbdt)")->required();
  explain_cmd->add_option("--data", explain_data, "export directory")->required();
  explain_cmd->add_option("--company", explain_company, "company id")->required();
  explain_cmd->add_option("--asof", explain_asof, "prediction date YYYY-MM-DD")->required();
  explain_cmd->add_option("--out", explain_out, "output directory")->required();

  // portfolio
  std::string pf_model, pf_data, pf_asof, pf_stage, pf_out;
  size_t pf_k = 10;
  auto* pf_cmd = app.add_subcommand("portfolio", "top-k portfolio + success curve");
  pf_cmd->add_option("--model", pf_model, "model JSON")->required();
  pf_cmd->add_option("--data", pf_data, "export directory")->required();
  pf_cmd->add_option("--asof", pf_asof, "window start YYYY-MM-DD")->required();
  pf_cmd->add_option("--k", pf_k, "portfolio size")->capture_default_str();
  pf_cmd->add_option("--stage", pf_stage, "before-a|a|b (stage-filtered pool)");
  pf_cmd->add_option("--out", pf_out, "output directory")->required();

  // tune
  std::string tune_features, tune_family, tune_strategy = "weight", tune_out, tune_log;
  int tune_budget = 20;
  auto* tune_cmd = app.add_subcommand("tune", "seeded random hyperparameter search");
  tune_cmd->add_option("--features", tune_features, "feature CSV")->required();
  tune_cmd->add_option("--model", tune_family, "model family")->required();
  tune_cmd->add_option("--strategy", tune_strategy, "none|smote|weight")->capture_default_str();
  tune_cmd->add_option("--budget", tune_budget, "number of trials")->capture_default_str();
  tune_cmd->add_option("--out", tune_out, "best params JSON")->required();
  tune_cmd->add_option("--log", tune_log, "trial log CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth_cmd->parsed())
      return cmd_synth(synth_config, synth_out, common, app.count("--seed") > 0);
    if (ingest_cmd->parsed()) return cmd_ingest(ingest_data, ingest_report, ingest_intervals);
    if (windows_cmd->parsed()) return cmd_windows(windows_data, windows_out, windows_dist);
    if (features_cmd->parsed())
      return cmd_features(feat_data, feat_samples, feat_out, feat_dict, feat_per_deal, common);
    if (train_cmd->parsed())
      return cmd_train(train_features, train_family, train_strategy, train_split, train_out,
                       train_test_out, train_log, train_params, common);
    if (eval_cmd->parsed()) return cmd_eval(eval_models, eval_test, eval_out, eval_threshold);
    if (study_cmd->parsed())
      return cmd_windows_study(study_data, study_mode, study_out, study_strategy, study_params,
                               common);
    if (explain_cmd->parsed())
      return cmd_explain(explain_model, explain_data, explain_company, explain_asof, explain_out);
    if (pf_cmd->parsed())
      return cmd_portfolio(pf_model, pf_data, pf_asof, pf_k, pf_stage, pf_out);
    if (tune_cmd->parsed())
      return cmd_tune(tune_features, tune_family, tune_strategy, tune_budget, tune_out, tune_log,
                      common);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}
