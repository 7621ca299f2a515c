// clda: command line front end for the clustered LDA pipeline.
//
//   clda run --config run.conf --workers 8
//   clda cluster --config run.conf -K 20
//   clda compare a/centroids.tsv b/topics.tsv --top-n 20

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "clda/errors.h"
#include "clda/io.h"
#include "clda/pipeline.h"
#include "clda/synthetic.h"

namespace fs = std::filesystem;

namespace {

struct Overrides {
  std::string config_file;
  std::map<std::string, std::string> values;
};

void add_config_options(CLI::App& app, Overrides& overrides) {
  app.add_option("--config", overrides.config_file, "key = value configuration file")
      ->check(CLI::ExistingFile);
  for (const auto& key : clda::PipelineConfig::keys()) {
    std::string names = "--" + key;
    std::string dashed = key;
    for (char& ch : dashed) {
      if (ch == '_') ch = '-';
    }
    if (dashed != key) names += ",--" + dashed;
    if (key == "local_topics") names += ",-L";
    if (key == "global_topics") names += ",-K";
    app.add_option_function<std::string>(
        names, [&overrides, key](const std::string& v) { overrides.values[key] = v; },
        "overrides '" + key + "' from the config file");
  }
}

clda::PipelineConfig resolve(const Overrides& overrides) {
  clda::PipelineConfig config;
  if (!overrides.config_file.empty()) {
    config = clda::PipelineConfig::from_file(overrides.config_file);
  }
  for (const auto& [key, value] : overrides.values) config.set(key, value);
  return config;
}

std::string join_words(const clda::Corpus& corpus, const clda::Document& doc) {
  std::string text;
  for (auto w : doc.tokens) {
    if (!text.empty()) text += ' ';
    text += corpus.vocabulary->word(w);
  }
  return text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Clustered LDA: per-segment topic models merged into global topics"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(CLDA_VERSION_STRING));

  Overrides overrides;
  add_config_options(app, overrides);

  std::map<std::string, CLI::App*> stage_commands;
  auto* run = app.add_subcommand("run", "run every stage in order");
  for (auto stage : clda::all_stages()) {
    const std::string name(clda::stage_name(stage));
    stage_commands[name] = app.add_subcommand(name, "run only the " + name + " stage");
  }

  std::string compare_a;
  std::string compare_b;
  std::size_t compare_top_n = 20;
  std::string compare_out;
  auto* compare = app.add_subcommand("compare", "match the topics of two topic files");
  compare->add_option("topics_a", compare_a)->required()->check(CLI::ExistingFile);
  compare->add_option("topics_b", compare_b)->required()->check(CLI::ExistingFile);
  compare->add_option("--top-n,-n", compare_top_n, "top words per topic")
      ->check(CLI::PositiveNumber);
  compare->add_option("--out,-o", compare_out, "write the match table here instead of stdout");

  clda::PlantedCorpusSpec synth_spec;
  std::string synth_out = "planted";
  auto* synth = app.add_subcommand("synth", "write a corpus sampled from planted topics");
  synth->add_option("--vocab-size", synth_spec.vocab_size)->capture_default_str();
  synth->add_option("--planted-topics", synth_spec.num_topics)->capture_default_str();
  synth->add_option("--segments", synth_spec.num_segments)->capture_default_str();
  synth->add_option("--documents", synth_spec.num_documents)->capture_default_str();
  synth->add_option("--doc-length", synth_spec.doc_length)->capture_default_str();
  synth->add_option("--doc-alpha", synth_spec.doc_alpha)->capture_default_str();
  synth->add_option("--synth-seed", synth_spec.seed)->capture_default_str();
  synth->add_option("--dir", synth_out, "output directory")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (compare->parsed()) {
      const auto report = clda::compare_models(compare_a, compare_b, compare_top_n, compare_out);
      if (compare_out.empty()) {
        clda::io::write_match_table(std::cout, report);
      }
      std::cerr << "mean_jaccard " << clda::io::format_fixed(report.mean_jaccard(), 6)
                << "  mean_dice " << clda::io::format_fixed(report.mean_dice(), 6) << '\n';
      return 0;
    }

    if (synth->parsed()) {
      const auto planted = clda::make_planted_corpus(synth_spec);
      std::vector<std::string> lines;
      for (const auto& doc : planted.corpus.documents) {
        lines.push_back(doc.doc_id + '\t' + doc.segment_key + '\t' + join_words(planted.corpus, doc));
      }
      clda::io::write_lines(fs::path(synth_out) / "corpus.tsv", lines);
      clda::io::write_topics(fs::path(synth_out) / "planted_topics.tsv", planted.topics);
      std::cerr << "wrote " << lines.size() << " documents to "
                << (fs::path(synth_out) / "corpus.tsv").string() << '\n';
      return 0;
    }

    const auto config = resolve(overrides);
    if (run->parsed()) {
      clda::run_pipeline(config);
      return 0;
    }
    for (const auto& [name, command] : stage_commands) {
      if (command->parsed()) {
        clda::run_stage(config, *clda::parse_stage(name));
        return 0;
      }
    }
  } catch (const clda::StageError& e) {
    std::cerr << "clda: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "clda: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
