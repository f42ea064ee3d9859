// Copyright 2026 The CRX Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Batch front end. Every subcommand loads a working state, applies one
// library operation and writes the result back, so each pipeline step is
// resumable from its .cre file.
//
// Exit codes: 0 success, 1 usage error, 2 data error.

#ifndef CRX_CLI_HPP_
#define CRX_CLI_HPP_

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "crx/analysis.hpp"
#include "crx/cre.hpp"
#include "crx/matching.hpp"
#include "crx/model.hpp"
#include "crx/scopus.hpp"
#include "crx/server.hpp"
#include "crx/wos.hpp"

namespace crx::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

enum class LogLevel { kQuiet, kInfo, kDebug };

// CRX_LOG=quiet|info|debug; anything else means info.
inline LogLevel log_level_from_env() {
  const char* v = std::getenv("CRX_LOG");
  if (!v) return LogLevel::kInfo;
  std::string s(v);
  if (s == "quiet") return LogLevel::kQuiet;
  if (s == "debug") return LogLevel::kDebug;
  return LogLevel::kInfo;
}

class Log {
 public:
  Log(std::ostream& err, LogLevel level) : err_(err), level_(level) {}

  void info(const std::string& msg) const {
    if (level_ != LogLevel::kQuiet) err_ << "crx: " << msg << '\n';
  }
  void debug(const std::string& msg) const {
    if (level_ == LogLevel::kDebug) err_ << "crx: debug: " << msg << '\n';
  }
  // Warnings and errors are never silenced.
  void warn(const std::string& msg) const { err_ << "crx: warning: " << msg << '\n'; }
  void error(const std::string& msg) const { err_ << "crx: error: " << msg << '\n'; }

 private:
  std::ostream& err_;
  LogLevel level_;
};

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw DataError("failed writing " + path);
}

inline cre::WorkingState load(const std::string& path) {
  return cre::load_cre_file(path);
}

inline void store(const cre::WorkingState& st, const std::string& in_path,
                  const std::string& out_path) {
  try {
    cre::save_cre_file(st, out_path.empty() ? in_path : out_path);
  } catch (const std::filesystem::filesystem_error& e) {
    throw DataError(e.what());
  } catch (const std::ios_base::failure& e) {
    throw DataError(e.what());
  }
}

}  // namespace detail

// Runs one command line; `args` excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out,
               std::ostream& err, LogLevel level = log_level_from_env()) {
  Log log(err, level);
  CLI::App app{"crx: cited-reference curation toolkit", "crx"};
  app.require_subcommand(1);
  app.fallthrough(false);

  std::string format;
  std::vector<std::string> files;
  std::string output;
  std::string state_path;
  std::string decisions_from;
  std::optional<double> threshold;
  std::optional<int> rpy_slack;
  bool no_blocking = false;
  int rpy = 0;
  int k = 10;
  int from = 0;
  int to = 0;
  bool drop_missing = false;
  std::string cr_id;
  int port = 8080;
  std::string host = "127.0.0.1";
  std::string ui_dir;
  std::string id_a;
  std::string id_b;
  std::string verdict;

  auto* imp = app.add_subcommand("import", "Read WoS or Scopus exports into a new working state");
  imp->add_option("--format", format, "Input format")->required()
      ->check(CLI::IsMember({"wos", "scopus"}));
  imp->add_option("files", files, "Export files")->required();
  imp->add_option("-o,--output", output, "Working state to create")->required();
  imp->add_option("--decisions-from", decisions_from,
                  "Carry manual decisions over from an earlier working state");

  auto* exp = app.add_subcommand("export", "Write the dataset as a WoS or Scopus export");
  exp->add_option("--format", format, "Output format")->required()
      ->check(CLI::IsMember({"wos", "scopus"}));
  exp->add_option("state", state_path, "Working state")->required();
  exp->add_option("-o,--output", output, "Output file")->required();

  auto* clu = app.add_subcommand("cluster", "Cluster equivalent cited references");
  clu->add_option("--threshold", threshold, "Similarity threshold in [0, 1]")
      ->check(CLI::Range(0.0, 1.0));
  clu->add_option("--rpy-slack", rpy_slack, "Allowed year difference inside a block")
      ->check(CLI::NonNegativeNumber);
  clu->add_flag("--no-blocking", no_blocking, "Compare all pairs regardless of year");
  clu->add_option("state", state_path, "Working state")->required();
  clu->add_option("-o,--output", output, "Write here instead of in place");

  auto* mrg = app.add_subcommand("merge", "Merge the cited references of each cluster");
  mrg->add_option("state", state_path, "Working state")->required();
  mrg->add_option("-o,--output", output, "Write here instead of in place");

  auto* dec = app.add_subcommand("decide", "Record a manual SAME/DIFFERENT decision");
  dec->add_option("--a", id_a, "First CR id")->required();
  dec->add_option("--b", id_b, "Second CR id")->required();
  dec->add_option("--verdict", verdict, "SAME or DIFFERENT")->required()
      ->check(CLI::IsMember({"SAME", "DIFFERENT"}));
  dec->add_option("state", state_path, "Working state")->required();
  dec->add_option("-o,--output", output, "Write here instead of in place");

  auto* spc = app.add_subcommand("rpys", "Reference publication year spectrum as CSV");
  spc->add_option("state", state_path, "Working state")->required();
  spc->add_option("-o,--output", output, "CSV file (default: standard output)");

  auto* top = app.add_subcommand("top", "Most cited references of one year");
  top->add_option("--rpy", rpy, "Reference publication year")->required();
  top->add_option("-k", k, "Number of rows")->check(CLI::PositiveNumber);
  top->add_option("state", state_path, "Working state")->required();

  auto* rmy = app.add_subcommand("remove-year", "Remove cited references by year range");
  rmy->add_option("--from", from, "First year removed")->required();
  rmy->add_option("--to", to, "Last year removed")->required();
  rmy->add_flag("--drop-missing", drop_missing, "Also remove references without a year");
  rmy->add_option("state", state_path, "Working state")->required();
  rmy->add_option("-o,--output", output, "Write here instead of in place");

  auto* det = app.add_subcommand("details", "All bibliographic details of one reference");
  det->add_option("--cr", cr_id, "CR id")->required();
  det->add_option("state", state_path, "Working state")->required();

  auto* srv = app.add_subcommand("serve", "Start the local curation service");
  srv->add_option("state", state_path, "Working state")->required();
  srv->add_option("--port", port, "TCP port")->check(CLI::Range(1, 65535));
  srv->add_option("--host", host, "Bind address");
  srv->add_option("--ui", ui_dir, "Directory with the built workbench");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    log.error(e.what());
    err << app.help();
    return kExitUsage;
  }
  if (rmy->parsed() && from > to) {
    log.error("--from must not be greater than --to");
    return kExitUsage;
  }

  try {
    if (imp->parsed()) {
      Dataset ds;
      if (format == "wos") {
        std::vector<wos::WosSource> sources;
        for (const auto& f : files) sources.push_back({f, detail::read_file(f)});
        ds = wos::parse_wos(sources);
      } else {
        std::vector<scopus::ScopusSource> sources;
        for (const auto& f : files) sources.push_back({f, detail::read_file(f)});
        scopus::ScopusImport result = scopus::parse_scopus_csv(sources);
        for (const auto& e : result.errors) {
          log.warn(e.source + ":" + std::to_string(e.line) + ": skipped row " +
                   std::to_string(e.row) + ": " + e.message);
        }
        ds = std::move(result.dataset);
      }
      cre::WorkingState st = cre::fresh_state(std::move(ds));
      if (!decisions_from.empty()) {
        cre::WorkingState prev = detail::load(decisions_from);
        st.config = prev.config;
        ClusterState cs = st.cluster_state;
        for (const auto& [pair, d] : cre::carry_decisions(prev, st.dataset)) {
          cs = apply_manual_decision(std::move(cs), d);
        }
        st.cluster_state = std::move(cs);
        log.info("carried " + std::to_string(st.cluster_state.decisions.size()) +
                 " manual decisions");
      }
      log.info("imported " + std::to_string(st.dataset.publications.size()) +
               " publications, " + std::to_string(st.dataset.crs.size()) +
               " distinct CRs, " + std::to_string(st.dataset.total_n_cr()) +
               " occurrences");
      detail::store(st, output, output);
      return kExitOk;
    }

    cre::WorkingState st = detail::load(state_path);
    log.debug("loaded " + state_path);

    if (exp->parsed()) {
      convert::LossReport loss;
      std::string data = format == "wos" ? wos::write_wos(st.dataset, &loss)
                                         : scopus::write_scopus_csv(st.dataset, &loss);
      detail::write_file(output, data);
      err << "loss report:\n" << loss.to_text();
      return kExitOk;
    }
    if (clu->parsed()) {
      SimilarityConfig cfg = st.config;
      if (threshold) cfg.threshold = *threshold;
      if (rpy_slack) cfg.rpy_slack = *rpy_slack;
      if (no_blocking) cfg.same_rpy_only = false;
      try {
        cfg.validate();
      } catch (const InvalidConfig& e) {
        log.error(e.what());
        return kExitUsage;
      }
      st.cluster_state = cluster_equivalent(st.dataset, cfg, st.cluster_state.decisions);
      st.config = cfg;
      out << "clusters: " << st.cluster_state.multi_member_clusters()
          << " (threshold " << cfg.threshold << ")\n";
      detail::store(st, state_path, output);
      return kExitOk;
    }
    if (mrg->parsed()) {
      std::size_t before = st.dataset.crs.size();
      st.dataset = merge_clusters(st.dataset, st.cluster_state);
      st.cluster_state = restrict_state(std::move(st.cluster_state), st.dataset);
      out << "merged: " << before << " -> " << st.dataset.crs.size() << " CRs, "
          << st.dataset.total_n_cr() << " occurrences\n";
      detail::store(st, state_path, output);
      return kExitOk;
    }
    if (dec->parsed()) {
      CrId a(id_a);
      CrId b(id_b);
      if (a == b) {
        log.error("a decision needs two different CRs");
        return kExitUsage;
      }
      for (const auto& id : {a, b}) {
        if (!st.dataset.find(id)) throw UnknownCrId(id);
      }
      MatchDecision d{CrPair::of(a, b), *parse_verdict(verdict), Provenance::kManual,
                      pair_similarity(st.dataset.crs.at(a), st.dataset.crs.at(b),
                                      st.config)};
      st.cluster_state = apply_manual_decision(std::move(st.cluster_state), d);
      detail::store(st, state_path, output);
      return kExitOk;
    }
    if (spc->parsed()) {
      std::string csv = spectrum_csv(rpy_histogram(st.dataset));
      if (output.empty()) {
        out << csv;
      } else {
        detail::write_file(output, csv);
      }
      return kExitOk;
    }
    if (top->parsed()) {
      out << "id\tn_cr\tauthors\tsource\traw\n";
      for (const auto& cr : top_crs_for_rpy(st.dataset, rpy, static_cast<std::size_t>(k))) {
        out << cr.id.str() << '\t' << cr.n_cr << '\t' << text::join(cr.authors, "; ")
            << '\t' << cr.source.value_or("") << '\t' << cr.raw << '\n';
      }
      return kExitOk;
    }
    if (rmy->parsed()) {
      std::size_t before = st.dataset.crs.size();
      st.dataset = remove_by_rpy(st.dataset, {from, to}, !drop_missing);
      st.cluster_state = restrict_state(std::move(st.cluster_state), st.dataset);
      out << "removed: " << before - st.dataset.crs.size() << " CRs\n";
      detail::store(st, state_path, output);
      return kExitOk;
    }
    if (det->parsed()) {
      const CitedReference* cr = st.dataset.find(CrId(cr_id));
      if (!cr) throw UnknownCrId(CrId(cr_id));
      for (const auto& row : display_details(*cr)) {
        out << row.label << '\t' << row.value << '\n';
      }
      return kExitOk;
    }
    if (srv->parsed()) {
      server::CurationService service(std::move(st), state_path);
      httplib::Server http;
      service.mount(http, ui_dir);
      log.info("serving " + state_path + " on http://" + host + ":" +
               std::to_string(port));
      if (!http.listen(host, port)) {
        log.error("cannot listen on " + host + ":" + std::to_string(port));
        return kExitData;
      }
      return kExitOk;
    }
  } catch (const DataError& e) {
    log.error(e.what());
    return kExitData;
  } catch (const std::invalid_argument& e) {
    log.error(e.what());
    return kExitData;
  }
  return kExitUsage;
}

inline int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace crx::cli

#endif  // CRX_CLI_HPP_
