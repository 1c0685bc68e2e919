/*
 * Copyright 2026 The FactorBoost Authors
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
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "factorboost/boosting.hpp"
#include "factorboost/forest.hpp"
#include "factorboost/model_io.hpp"
#include "factorboost/residual_bench.hpp"
#include "factorboost/scheduler.hpp"

namespace fb = factorboost;

namespace {

int env_threads_fallback() {
  const char* env = std::getenv("FACTORBOOST_THREADS");
  if (env != nullptr) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  return fb::default_workers();
}

void write_training_log(const std::vector<fb::IterationLog>& log, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  fb::check(out.good(), "cannot open training log '" + path + "'");
  out << "iteration,train_metric,seconds,messages_computed,messages_reused\n";
  for (const fb::IterationLog& row : log) {
    out << row.iteration << ',' << fb::format_double(row.train_metric) << ','
        << fb::format_double(row.seconds) << ',' << row.messages_computed << ','
        << row.messages_reused << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"factorboost: tree models trained directly over normalized data"};
  app.require_subcommand(1);

  int threads = 0;  // 0 = env / hardware default

  // ---- train ----
  auto* train = app.add_subcommand("train", "train a model from a dataset config");
  std::string config_path, model_out, log_out, model_type = "gbm", objective = "rmse";
  std::string criterion, growth = "best_first", dump_messages_dir, strategy = "auto";
  int num_leaves = 31, max_depth = 32, iterations = 10, min_data_in_leaf = 1, n_trees = 10;
  double learning_rate = 0.1, alpha = 0.0, beta = 1e-6;
  double bagging_fraction = 0.1, feature_fraction = 0.8;
  double huber_delta = 1.0, fair_c = 1.0, quantile_alpha = 0.5, tweedie_rho = 1.5;
  uint64_t seed = 0;
  bool no_cache = false;
  train->add_option("--config", config_path, "dataset config JSON")->required();
  train->add_option("--out", model_out, "output model JSON path")->required();
  train->add_option("--model-type", model_type, "dt | rf | gbm (default gbm)");
  train->add_option("--objective", objective,
                    "gbm objective: rmse, mae, huber, fair, poisson, quantile, mape, gamma, "
                    "tweedie, softmax");
  train->add_option("--criterion", criterion, "dt/rf criterion: variance, gini, entropy, chi_square");
  train->add_option("--num-leaves", num_leaves, "maximum leaves per tree");
  train->add_option("--max-depth", max_depth, "maximum tree depth");
  train->add_option("--iterations", iterations, "boosting iterations / rf trees");
  train->add_option("--learning-rate", learning_rate, "shrinkage (gbm)");
  train->add_option("--min-data-in-leaf", min_data_in_leaf, "minimum rows per leaf");
  train->add_option("--alpha", alpha, "per-leaf penalty in the split gain");
  train->add_option("--beta", beta, "hessian regularizer (must stay positive)");
  train->add_option("--bagging-fraction", bagging_fraction, "rf row sampling rate");
  train->add_option("--feature-fraction", feature_fraction, "rf feature sampling rate");
  train->add_option("--growth", growth, "best_first | depth_wise");
  train->add_option("--seed", seed, "sampling seed");
  train->add_option("--threads", threads, "worker threads (env FACTORBOOST_THREADS)");
  train->add_option("--log", log_out, "training log CSV (default <out>.log.csv)");
  train->add_option("--residual-strategy", strategy, "auto | snowflake | update_relation");
  train->add_option("--huber-delta", huber_delta, "huber objective delta");
  train->add_option("--fair-c", fair_c, "fair objective c");
  train->add_option("--quantile-alpha", quantile_alpha, "quantile objective level");
  train->add_option("--tweedie-rho", tweedie_rho, "tweedie objective rho in (1,2)");
  train->add_flag("--no-cache", no_cache, "disable the message cache");
  train->add_option("--dump-messages", dump_messages_dir, "debug-dump message payloads as CSV");

  // ---- predict ----
  auto* predict = app.add_subcommand("predict", "predictions for every base-table row");
  std::string p_model, p_config, p_out;
  predict->add_option("--model", p_model, "model JSON")->required();
  predict->add_option("--config", p_config, "dataset config JSON")->required();
  predict->add_option("--out", p_out, "predictions CSV")->required();

  // ---- bench ----
  auto* bench = app.add_subcommand("bench", "factorized vs naive comparison on a synthetic schema");
  size_t fact_rows = 1000000, dim_rows = 10000;
  int bench_leaves = 8, bench_runs = 5, bench_extra = 5;
  uint64_t bench_seed = 42;
  bench->add_option("--fact-rows", fact_rows, "fact table rows (default 1e6)");
  bench->add_option("--dim-rows", dim_rows, "dimension rows (default 1e4)");
  bench->add_option("--leaves", bench_leaves, "stump leaves (default 8)");
  bench->add_option("--runs", bench_runs, "repetitions, median reported (default 5)");
  bench->add_option("--extra-columns", bench_extra, "extra fact columns to copy (default 5)");
  bench->add_option("--seed", bench_seed, "generator seed");
  bench->add_option("--threads", threads, "worker threads");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      if (threads <= 0) threads = env_threads_fallback();
      fb::Database db = fb::load_dataset(fb::load_dataset_config(config_path));

      fb::TrainParams tree;
      tree.max_leaves = num_leaves;
      tree.max_depth = max_depth;
      tree.min_leaf_count = static_cast<double>(min_data_in_leaf);
      tree.alpha = alpha;
      tree.beta = beta;
      tree.growth = growth == "depth_wise" ? fb::GrowthPolicy::depth_wise : fb::GrowthPolicy::best_first;
      tree.threads = threads;

      fb::EnsembleModel model;
      std::vector<fb::IterationLog> log;
      if (model_type == "dt") {
        fb::DtParams params;
        params.tree = tree;
        params.criterion = criterion;
        params.use_message_cache = !no_cache;
        params.dump_messages_dir = dump_messages_dir;
        model = fb::train_decision_tree(db, params);
      } else if (model_type == "rf") {
        fb::ForestParams params;
        params.n_trees = iterations > 0 ? iterations : n_trees;
        params.sample.row_rate = bagging_fraction;
        params.sample.feature_rate = feature_fraction;
        params.sample.seed = seed;
        params.tree = tree;
        params.criterion = criterion;
        params.use_message_cache = !no_cache;
        model = fb::train_random_forest(db, params);
      } else if (model_type == "gbm") {
        fb::GbmParams params;
        params.iterations = iterations;
        params.learning_rate = learning_rate;
        params.objective = objective;
        params.objective_params.huber_delta = huber_delta;
        params.objective_params.fair_c = fair_c;
        params.objective_params.quantile_alpha = quantile_alpha;
        params.objective_params.tweedie_rho = tweedie_rho;
        params.tree = tree;
        params.use_message_cache = !no_cache;
        if (strategy == "snowflake") params.strategy = fb::ResidualStrategy::snowflake;
        if (strategy == "update_relation") params.strategy = fb::ResidualStrategy::update_relation;
        params.dump_messages_dir = dump_messages_dir;
        model = fb::train_gbm(db, params, &log);
      } else {
        fb::fail("unknown --model-type '" + model_type + "' (expected dt, rf, or gbm)");
      }

      fb::save_model(model, model_out);
      if (log_out.empty()) log_out = model_out + ".log.csv";
      write_training_log(log, log_out);
      std::cout << "wrote " << model_out << " (" << model.trees.size() << " trees)\n";
      return 0;
    }

    if (*predict) {
      fb::EnsembleModel model = fb::load_model(p_model);
      fb::Database db = fb::load_dataset(fb::load_dataset_config(p_config));
      fb::PredictionResult result = fb::predict_batch(model, db);
      fb::write_predictions_csv(result, p_out);
      std::cout << "wrote " << p_out << " (" << result.values.size() << " rows)\n";
      return 0;
    }

    if (*bench) {
      fb::UpdateBenchResult result = fb::run_update_bench(fact_rows, dim_rows, bench_leaves,
                                                          bench_extra, bench_runs, bench_seed);
      std::cout << result.table();
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
