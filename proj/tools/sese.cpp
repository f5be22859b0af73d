// sese: score, evaluate and inspect structural-entropy uncertainty.

#include <sese/cli.hpp>

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

namespace {

struct Streams {
  std::ifstream in_file;
  std::ofstream out_file;
  std::istream* in = &std::cin;
  std::ostream* out = &std::cout;
};

bool open(Streams& s, const std::string& input, const std::string& output) {
  if (!input.empty() && input != "-") {
    s.in_file.open(input);
    if (!s.in_file) {
      std::cerr << "error: cannot read " << input << '\n';
      return false;
    }
    s.in = &s.in_file;
  }
  if (!output.empty() && output != "-") {
    s.out_file.open(output);
    if (!s.out_file) {
      std::cerr << "error: cannot write " << output << '\n';
      return false;
    }
    s.out = &s.out_file;
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semantic structural entropy for LLM uncertainty"};
  app.require_subcommand(1);

  sese::RunConfig cfg;
  std::string mode = "sentence", provider = "file", input, output;
  std::string nli_url, id;
  std::string cache_dir;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--mode", mode, "sentence or claims")->check(CLI::IsMember({"sentence", "claims"}));
    sub->add_option("--input,-i", input, "input JSONL (default stdin)");
    sub->add_option("--seed", cfg.seed, "seed for the mock provider and bootstrap")->capture_default_str();
  };
  auto scoring = [&](CLI::App* sub) {
    sub->add_option("--k", cfg.k, "encoding tree height (default 3 sentence, 2 claims)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--provider", provider, "entailment source")
        ->check(CLI::IsMember({"file", "wire", "mock"}))
        ->capture_default_str();
    sub->add_option("--nli-file", cfg.provider.path, "entailment fixture for the file provider");
    sub->add_option("--nli-url", nli_url, "sidecar URL for the wire provider");
    sub->add_option("--cache-dir", cache_dir, "on-disk entailment cache");
    sub->add_option("--timeout", cfg.provider.timeout_s, "wire timeout in seconds")->capture_default_str();
    sub->add_option("--retries", cfg.provider.max_retries, "wire retries")->capture_default_str();
  };

  auto* score = app.add_subcommand("score", "score a dataset, one JSON report per line");
  common(score);
  scoring(score);
  score->add_option("--output,-o", output, "output JSONL (default stdout)");
  score->add_option("--jobs,-j", cfg.jobs, "records scored in parallel")->check(CLI::PositiveNumber);
  score->add_flag("--tree", cfg.keep_tree, "include the encoding tree in claim reports");

  auto* eval = app.add_subcommand("eval", "AUROC / AURAC of scored reports against labels");
  common(eval);
  eval->add_option("--method", cfg.method, "sese, dse, an extras key, or a claim baseline")->capture_default_str();
  eval->add_flag("--ci", cfg.ci, "95% bootstrap interval for AUROC");
  eval->add_option("--resamples", cfg.n_resamples, "bootstrap resamples")->capture_default_str();
  eval->add_flag("--curve", cfg.curve, "print the rejection-accuracy curve as CSV");
  eval->add_option("--output,-o", output, "write the result as JSON");

  auto* inspect = app.add_subcommand("inspect", "show sparsification, graph and tree for one record");
  common(inspect);
  scoring(inspect);
  inspect->add_option("--id", id, "record id")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    cfg.mode = sese::parse_run_mode(mode);
    cfg.provider.kind = sese::parse_provider_kind(provider);
    cfg.provider.seed = cfg.seed;
    if (!nli_url.empty()) cfg.provider.endpoint = nli_url;
    if (!cache_dir.empty()) cfg.provider.cache_dir = cache_dir;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  Streams s;
  if (*eval) {
    if (!output.empty()) cfg.output_json = output;
    if (!open(s, input, "")) return 1;
    return sese::run_eval(cfg, *s.in, *s.out, std::cerr);
  }
  if (!open(s, input, *score ? output : "")) return 1;
  if (*score) return sese::run_score(cfg, *s.in, *s.out, std::cerr);
  cfg.id = id;
  return sese::run_inspect(cfg, *s.in, *s.out, std::cerr);
}
