// Python surface over the harness core. Everything crosses the boundary as
// plain dicts/lists mirroring the on-disk JSON forms, so the module stays a
// thin shim over the same code paths the CLI uses.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "trex/cli.hpp"
#include "trex/corpus.hpp"
#include "trex/errors.hpp"
#include "trex/fixtures.hpp"
#include "trex/metrics.hpp"
#include "trex/normalizer.hpp"
#include "trex/schema.hpp"
#include "trex/strategies.hpp"
#include "trex/util.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

py::object to_py(const json& j) {
  switch (j.type()) {
    case json::value_t::null:
      return py::none();
    case json::value_t::boolean:
      return py::bool_(j.get<bool>());
    case json::value_t::number_integer:
      return py::int_(j.get<long long>());
    case json::value_t::number_unsigned:
      return py::int_(j.get<unsigned long long>());
    case json::value_t::number_float:
      return py::float_(j.get<double>());
    case json::value_t::string:
      return py::str(j.get<std::string>());
    case json::value_t::array: {
      py::list out;
      for (const auto& item : j) out.append(to_py(item));
      return out;
    }
    case json::value_t::object: {
      py::dict out;
      for (const auto& [key, value] : j.items()) out[py::str(key)] = to_py(value);
      return out;
    }
    default:
      return py::none();
  }
}

json from_py(py::handle obj) {
  if (obj.is_none()) return nullptr;
  if (py::isinstance<py::bool_>(obj)) return obj.cast<bool>();
  if (py::isinstance<py::int_>(obj)) return obj.cast<long long>();
  if (py::isinstance<py::float_>(obj)) return obj.cast<double>();
  if (py::isinstance<py::str>(obj)) return obj.cast<std::string>();
  if (py::isinstance<py::dict>(obj)) {
    json out = json::object();
    for (auto item : obj.cast<py::dict>()) {
      out[item.first.cast<std::string>()] = from_py(item.second);
    }
    return out;
  }
  if (py::isinstance<py::list>(obj) || py::isinstance<py::tuple>(obj)) {
    json out = json::array();
    for (auto item : obj.cast<py::sequence>()) out.push_back(from_py(item));
    return out;
  }
  throw py::type_error("cannot convert " +
                       py::str(obj.get_type()).cast<std::string>() + " to JSON");
}

trex::Rel rel_arg(const std::string& name) {
  auto r = trex::rel_from_name(name);
  if (!r) throw trex::ConfigError("unknown relation: " + name);
  return *r;
}

std::string status_name(trex::ParseStatus s) {
  switch (s) {
    case trex::ParseStatus::clean: return "clean";
    case trex::ParseStatus::fuzzy: return "fuzzy";
    default: return "abstain";
  }
}

std::string yesno_name(trex::YesNo v) {
  switch (v) {
    case trex::YesNo::yes: return "yes";
    case trex::YesNo::no: return "no";
    default: return "unknown";
  }
}

std::vector<trex::GoldPair> pairs_arg(const json& j) {
  std::vector<trex::GoldPair> out;
  for (const auto& p : j) {
    out.push_back({p.at("doc_id").get<std::string>(), p.at("e1").get<std::string>(),
                   p.at("e2").get<std::string>(), rel_arg(p.at("label").get<std::string>())});
  }
  return out;
}

std::vector<trex::Prediction> predictions_arg(const json& j) {
  std::vector<trex::Prediction> out;
  for (const auto& p : j) out.push_back(trex::Prediction::from_json(p));
  return out;
}

json schema_json(const trex::RelationSchema& schema) {
  json out = schema.to_json();
  json output = json::array();
  for (auto r : schema.output_space()) output.push_back(trex::rel_name(r));
  json cot = json::array();
  for (auto r : schema.cot_order()) cot.push_back(trex::rel_name(r));
  out["output_space"] = output;
  out["cot_order"] = cot;
  out["content_hash"] = schema.content_hash();
  return out;
}

json run_outcome_json(const trex::RunOutcome& outcome) {
  json preds = json::array();
  for (const auto& p : outcome.predictions) preds.push_back(p.to_json());
  return {{"run_dir", outcome.run_dir.string()},
          {"manifest", outcome.manifest.to_json()},
          {"predictions", preds},
          {"provider_calls", outcome.provider_calls},
          {"cache_hits", outcome.cache_hits}};
}

}  // namespace

PYBIND11_MODULE(_trex, m) {
  m.doc() = "zero-shot temporal relation extraction harness";

  py::register_exception<trex::Error>(m, "Error");

  m.def("datasets", [] { return std::vector<std::string>{"matres", "tbdense", "tddman"}; },
        "Names of the built-in dataset schemas.");

  m.def(
      "schema",
      [](const std::string& dataset) { return to_py(schema_json(trex::builtin_schema(dataset))); },
      py::arg("dataset"),
      "Full schema description: labels, inverses, prompts, output_space, cot_order.");

  m.def(
      "inverse_of",
      [](const std::string& dataset, const std::string& label) {
        return std::string(trex::rel_name(trex::builtin_schema(dataset).inverse_of(rel_arg(label))));
      },
      py::arg("dataset"), py::arg("label"));

  m.def(
      "orient",
      [](const std::string& dataset, const std::string& anchor, const std::string& relation,
         const std::string& other, const std::string& e1, const std::string& e2) {
        return std::string(trex::rel_name(
            trex::orient(trex::builtin_schema(dataset), anchor, rel_arg(relation), other, e1, e2)));
      },
      py::arg("dataset"), py::arg("anchor"), py::arg("relation"), py::arg("other"), py::arg("e1"),
      py::arg("e2"),
      "Map an (anchor, relation, other) assertion onto the ordered pair (e1, e2).");

  m.def(
      "ranking_answer_relation",
      [](const std::string& label) {
        return std::string(trex::rel_name(trex::ranking_answer_relation(rel_arg(label))));
      },
      py::arg("label"));

  m.def(
      "parse_label",
      [](const std::string& text, const std::string& dataset) {
        auto verdict = trex::parse_label(text, trex::builtin_schema(dataset));
        py::dict out;
        out["label"] = std::string(trex::rel_name(verdict.label));
        out["status"] = status_name(verdict.status);
        out["ambiguous"] = verdict.ambiguous;
        return out;
      },
      py::arg("text"), py::arg("dataset"),
      "Total normalizer: every reply maps to a schema label or vague.");

  m.def(
      "parse_yesno",
      [](const std::string& text, std::optional<std::string> dataset) {
        if (!dataset) return yesno_name(trex::parse_yesno(text));
        auto schema = trex::builtin_schema(*dataset);
        return yesno_name(trex::parse_yesno(text, &schema));
      },
      py::arg("text"), py::arg("dataset") = std::nullopt);

  m.def(
      "is_refusal",
      [](const std::string& text, std::optional<std::string> dataset) {
        if (!dataset) return trex::is_refusal(text);
        auto schema = trex::builtin_schema(*dataset);
        return trex::is_refusal(text, &schema);
      },
      py::arg("text"), py::arg("dataset") = std::nullopt);

  m.def("strip_event_tags", &trex::strip_event_tags, py::arg("text"));

  m.def(
      "load_corpus",
      [](const std::string& path, const std::string& dataset, const std::string& format,
         const std::string& docs) {
        auto fmt = trex::corpus_format_from_name(format);
        if (!fmt) throw trex::ConfigError("unknown corpus format: " + format);
        trex::Corpus corpus;
        if (*fmt == trex::CorpusFormat::native_json) {
          auto parsed = json::parse(trex::read_file(path));
          std::string name = dataset;
          if (name.empty() && parsed.is_object() && parsed.contains("dataset")) {
            name = parsed.at("dataset").get<std::string>();
          }
          if (name.empty()) throw trex::ConfigError("pass dataset= for corpora that omit it");
          corpus = trex::corpus_from_json(parsed, trex::builtin_schema(name));
        } else {
          if (dataset.empty()) throw trex::ConfigError("tsv formats need dataset=");
          corpus = trex::load_corpus(path, *fmt, trex::builtin_schema(dataset), docs);
        }
        return to_py(trex::corpus_to_json(corpus));
      },
      py::arg("path"), py::arg("dataset") = "", py::arg("format") = "native_json",
      py::arg("docs") = "",
      "Load a corpus (native_json, matres_tsv, or tdd_tsv) as a plain dict.");

  m.def(
      "generate_fixture",
      [](py::dict spec, std::optional<std::uint64_t> seed) {
        auto parsed = trex::FixtureSpec::from_json(from_py(spec));
        auto corpus = seed ? trex::generate_fixture(parsed, *seed) : trex::generate_fixture(parsed);
        return to_py(trex::corpus_to_json(corpus));
      },
      py::arg("spec"), py::arg("seed") = std::nullopt,
      "Deterministically expand a fixture spec into a corpus dict.");

  m.def(
      "aggregate_event_ranking",
      [](py::list assertions, py::list gold_pairs, const std::string& dataset,
         int conflict_threshold) {
        std::vector<trex::Assertion> parsed;
        for (auto a : assertions) parsed.push_back(trex::Assertion::from_json(from_py(a)));
        trex::StrategyOptions opts;
        opts.conflict_threshold = conflict_threshold;
        auto preds = trex::aggregate_event_ranking(parsed, pairs_arg(from_py(gold_pairs)),
                                                   trex::builtin_schema(dataset), opts);
        json out = json::array();
        for (const auto& p : preds) out.push_back(p.to_json());
        return to_py(out);
      },
      py::arg("assertions"), py::arg("gold_pairs"), py::arg("dataset"),
      py::arg("conflict_threshold") = 2,
      "Fold pooled ranking assertions into one prediction per gold pair.");

  m.def(
      "score",
      [](py::list predictions, py::list gold_pairs, const std::string& dataset,
         bool include_vague) {
        auto report = trex::score(predictions_arg(from_py(predictions)),
                                  pairs_arg(from_py(gold_pairs)), trex::builtin_schema(dataset),
                                  include_vague);
        return to_py(report.to_json());
      },
      py::arg("predictions"), py::arg("gold_pairs"), py::arg("dataset"),
      py::arg("include_vague") = true,
      "Precision/recall/F1 report as a dict; raises Error on malformed inputs.");

  m.def(
      "run",
      [](py::dict config) {
        auto cfg = trex::RunConfig::from_json(from_py(config));
        trex::RunOutcome outcome;
        {
          py::gil_scoped_release release;
          outcome = trex::execute_run(cfg);
        }
        return to_py(run_outcome_json(outcome));
      },
      py::arg("config"),
      "Execute a run from a config dict (same keys as the CLI --config file).");

  m.def(
      "score_run",
      [](const std::string& run_dir, std::optional<bool> include_vague) {
        auto manifest = trex::load_manifest(run_dir);
        auto cfg = trex::RunConfig::from_json(manifest.config);
        json report;
        {
          py::gil_scoped_release release;
          auto corpus = trex::load_run_corpus(cfg);
          auto preds =
              predictions_arg(json::parse(trex::read_file(run_dir + "/predictions.json")));
          bool vague = include_vague ? *include_vague : !cfg.exclude_vague_overall;
          report = trex::score(preds, corpus.pairs, corpus.schema, vague).to_json();
        }
        return to_py(report);
      },
      py::arg("run_dir"), py::arg("include_vague") = std::nullopt,
      "Score a recorded run directory against its own corpus.");

  m.def(
      "cli",
      [](const std::vector<std::string>& args) {
        std::vector<std::string> argv = {"trex"};
        argv.insert(argv.end(), args.begin(), args.end());
        std::vector<const char*> raw;
        for (const auto& a : argv) raw.push_back(a.c_str());
        py::gil_scoped_release release;
        int code = trex::run_cli(int(raw.size()), raw.data());
        std::fflush(stdout);  // interleave cleanly with python-level capture
        std::cout.flush();
        return code;
      },
      py::arg("args"), "Invoke the command line entry point; returns its exit code.");
}
