#include "chainarg/cli.hpp"

#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <csignal>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>

#include <CLI11.hpp>

#include "chainarg/case_file.hpp"
#include "chainarg/chain.hpp"
#include "chainarg/engine.hpp"
#include "chainarg/error.hpp"
#include "chainarg/evaluation.hpp"
#include "chainarg/heuristics.hpp"
#include "chainarg/report.hpp"
#include "chainarg/schemes.hpp"
#include "chainarg/service.hpp"

namespace chainarg {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Style {
  bool color = false;

  std::string label(Label l) const {
    const std::string text(to_string(l));
    if (!color) return text;
    const char* code = l == Label::in ? "\x1b[32m" : l == Label::out ? "\x1b[31m" : "\x1b[33m";
    return code + text + "\x1b[0m";
  }
};

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

// Table with left-aligned columns separated by two spaces. Widths ignore the
// colour escapes, which only ever appear in the last column.
void print_table(std::ostream& out, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& r : rows) {
    for (std::size_t i = 0; i + 1 < r.size(); ++i) {
      if (width.size() <= i) width.resize(i + 1, 0);
      width[i] = std::max(width[i], r[i].size());
    }
  }
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i + 1 < r.size()) {
        out << pad(r[i], width[i]) << "  ";
      } else {
        out << r[i];
      }
    }
    out << "\n";
  }
}

void print_evaluation(std::ostream& out, const Evaluation& e, const Style& style) {
  if (e.statuses.empty()) {
    out << "no arguments\n";
    return;
  }
  std::vector<std::vector<std::string>> rows{{"STATEMENT", "ARGUMENTS", "STATUS"}};
  for (const auto& st : e.statuses) {
    std::string args;
    for (const auto& a : st.concluded_by) args += (args.empty() ? "" : ",") + a;
    rows.push_back({st.statement.to_string(), args, style.label(st.status)});
  }
  print_table(out, rows);

  out << "\n";
  std::vector<std::vector<std::string>> nodes{{"NODE", "ATTACKERS", "LABEL"}};
  for (std::size_t i = 0; i < e.af.size(); ++i) {
    std::string attackers;
    for (auto a : e.af.attackers_of(i)) attackers += (attackers.empty() ? "" : ",") + e.af.nodes()[a].id;
    nodes.push_back({e.af.nodes()[i].id, attackers.empty() ? "-" : attackers, style.label(e.labelling[i])});
  }
  print_table(out, nodes);
}

void print_cqs(std::ostream& out, const std::vector<CqEntry>& cqs) {
  for (const auto& q : cqs) {
    out << q.arg_id << "\t" << q.cq_id << "\t" << to_string(q.kind) << "\t" << to_string(q.state) << "\t" << q.text;
    if (!q.justification.empty()) out << "\t" << q.justification;
    out << "\n";
  }
}

std::pair<std::string, std::string> split_once(const std::string& s, char sep, const std::string& what) {
  const auto pos = s.find(sep);
  if (pos == std::string::npos || pos == 0) throw std::invalid_argument(what + " '" + s + "' lacks '" + sep + "'");
  return {s.substr(0, pos), s.substr(pos + 1)};
}

const TransactionSet& require_chain(const CaseFile& c) {
  if (c.transactions() == nullptr) throw LookupError("case " + c.case_id + " has no chain");
  return *c.transactions();
}

bool stdout_is_color_tty(const std::ostream& out) {
  if (&out != &std::cout) return false;
  const char* no_color = std::getenv("NO_COLOR");
  if (no_color != nullptr && *no_color != '\0') return false;
  return isatty(STDOUT_FILENO) != 0;
}

Service* g_service = nullptr;

extern "C" void on_signal(int) {
  if (g_service != nullptr) g_service->stop();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Argument-based evaluation of address-clustering evidence", "chainarg"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "chainarg 0.1.0");

  const Style style{stdout_is_color_tty(out)};

  std::string case_path, chain_path, out_path, case_dir, ui_dir, format, semantics = "grounded";
  std::string case_id, title, scheme_id, arg_id, cq_id, answer, why, host = "127.0.0.1";
  std::vector<std::string> binds, supports, from, to;
  bool no_filter = false, as_json = false, all = false, force = false, embed = false, ignore_open = false;
  int port = 8080, max_hops = 3;

  auto* ingest = app.add_subcommand("ingest", "Create a case file from a chain file");
  ingest->add_option("--chain", chain_path, "Chain file (JSON)")->required();
  ingest->add_option("--out", out_path, "Case file to write")->required();
  ingest->add_option("--case-id", case_id, "Case id (default: file name stem)");
  ingest->add_option("--title", title, "Case title");
  ingest->add_flag("--embed", embed, "Embed the chain instead of referencing it");
  ingest->add_flag("--force", force, "Overwrite an existing case file");

  auto* validate = app.add_subcommand("validate", "Check fees, dangling outpoints and double spends");
  validate->add_option("--case", case_path, "Case file");
  validate->add_option("--chain", chain_path, "Chain file");
  validate->add_flag("--json", as_json, "JSON output");

  auto* cluster = app.add_subcommand("cluster", "Multi-input clustering");
  cluster->add_option("--case", case_path, "Case file")->required();
  cluster->add_flag("--no-coinjoin-filter", no_filter, "Also merge inputs of CoinJoin-like transactions");
  cluster->add_flag("--json", as_json, "JSON output");

  auto* trace = app.add_subcommand("trace", "Payment paths between address sets");
  trace->add_option("--case", case_path, "Case file")->required();
  trace->add_option("--from", from, "Source addresses")->required()->delimiter(',');
  trace->add_option("--to", to, "Destination addresses")->required()->delimiter(',');
  trace->add_option("--max-hops", max_hops, "Maximum path length")->check(CLI::PositiveNumber);

  auto* auto_args = app.add_subcommand("auto-args", "Instantiate multi-input and change-address arguments");
  auto_args->add_option("--case", case_path, "Case file")->required();

  auto* instantiate_cmd = app.add_subcommand("instantiate", "Instantiate a scheme");
  instantiate_cmd->add_option("--case", case_path, "Case file")->required();
  instantiate_cmd->add_option("--scheme", scheme_id, "Scheme id")->required();
  instantiate_cmd->add_option("--bind", binds, "Variable binding VAR=VALUE");
  instantiate_cmd->add_option("--id", arg_id, "Argument id");
  instantiate_cmd->add_option("--support", supports, "Premise support INDEX=evidence:ID or INDEX=argument:ID");

  auto* cq = app.add_subcommand("cq", "Critical questions");
  cq->require_subcommand(1);
  auto* cq_list = cq->add_subcommand("list", "List critical questions");
  cq_list->add_option("--case", case_path, "Case file")->required();
  cq_list->add_flag("--all", all, "Include answered questions");
  auto* cq_answer = cq->add_subcommand("answer", "Answer a critical question");
  cq_answer->add_option("--case", case_path, "Case file")->required();
  cq_answer->add_option("--arg", arg_id, "Argument id")->required();
  cq_answer->add_option("--cq", cq_id, "Critical question id")->required();
  cq_answer->add_option("--answer", answer, "favourable or unfavourable")
      ->required()
      ->check(CLI::IsMember({"favourable", "unfavourable"}));
  cq_answer->add_option("--why", why, "Justification");

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Label arguments and statements");
  evaluate_cmd->add_option("--case", case_path, "Case file")->required();
  evaluate_cmd->add_option("--semantics", semantics, "grounded or complete")
      ->check(CLI::IsMember({"grounded", "complete"}));
  evaluate_cmd->add_flag("--json", as_json, "JSON output");
  evaluate_cmd->add_flag("--ignore-open-assumptions", ignore_open, "Open assumption CQs do not attack");

  auto* report = app.add_subcommand("report", "Suspicion report");
  report->add_option("--case", case_path, "Case file")->required();
  report->add_option("--format", format, "md or json")->required()->check(CLI::IsMember({"md", "json"}));
  report->add_flag("--ignore-open-assumptions", ignore_open, "Open assumption CQs do not attack");

  auto* export_af = app.add_subcommand("export-af", "Export the argumentation framework");
  export_af->add_option("--case", case_path, "Case file")->required();
  export_af->add_option("--format", format, "apx or json")->required()->check(CLI::IsMember({"apx", "json"}));
  export_af->add_flag("--ignore-open-assumptions", ignore_open, "Open assumption CQs do not attack");

  auto* serve = app.add_subcommand("serve", "Serve the REST API");
  serve->add_option("--case-dir", case_dir, "Directory of <id>.case.json files")->required();
  serve->add_option("--port", port, "TCP port")->required()->check(CLI::Range(1, 65535));
  serve->add_option("--host", host, "Listen address");
  serve->add_option("--ui-dir", ui_dir, "Static files mounted at /");

  auto* list = app.add_subcommand("list", "List cases in a case directory");
  list->add_option("--case-dir", case_dir, "Case directory")->required();

  auto* show = app.add_subcommand("show", "Print a case as JSON");
  show->add_option("--case", case_path, "Case file")->required();

  auto* arguments = app.add_subcommand("arguments", "Print arguments with their labels as JSON");
  arguments->add_option("--case", case_path, "Case file")->required();

  auto* catalog_cmd = app.add_subcommand("catalog", "Print the scheme catalog");
  catalog_cmd->add_flag("--json", as_json, "JSON output");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return 0;
    }
    err << "chainarg: " << e.what() << "\n" << "Run 'chainarg --help' for usage.\n";
    return 2;
  }

  const FrameworkOptions fw_options{!ignore_open};

  try {
    if (ingest->parsed()) {
      const auto raw = read_file(chain_path);
      auto set = std::make_shared<const TransactionSet>(parse_chain_file(raw));
      const fs::path out_file(out_path);
      if (fs::exists(out_file) && !force) throw IntegrityError(out_path + " exists (use --force to overwrite)");
      CaseFile c;
      c.case_id = case_id.empty() ? out_file.filename().string().substr(0, out_file.filename().string().find('.'))
                                  : case_id;
      c.title = title;
      if (!embed) {
        const auto base = fs::absolute(out_file).parent_path();
        c.chain.path = fs::relative(fs::absolute(chain_path), base).generic_string();
      }
      c.chain.transactions = set;
      check_case(c);
      save_case(c, out_file);
      out << "wrote " << out_path << ": case " << c.case_id << ", " << set->size() << " transactions, "
          << set->addresses().size() << " addresses\n";
      return 0;
    }

    if (validate->parsed()) {
      if (case_path.empty() == chain_path.empty()) {
        err << "chainarg: validate needs exactly one of --case or --chain\n";
        return 2;
      }
      std::optional<TransactionSet> owned;
      const TransactionSet* set = nullptr;
      CaseFile c;
      if (!chain_path.empty()) {
        owned.emplace(parse_chain_file(read_file(chain_path)));
        set = &*owned;
      } else {
        c = load_case(case_path);
        set = &require_chain(c);
      }
      const auto r = validate_set(*set);
      if (as_json) {
        json fees = json::array();
        for (const auto& f : r.fees) fees.push_back({{"txid", f.txid}, {"fee_sat", f.fee}});
        json findings = json::array();
        for (const auto& f : r.findings) {
          findings.push_back({{"kind", to_string(f.kind)}, {"txid", f.txid}, {"detail", f.detail}});
        }
        out << json{{"valid", r.valid()},
                    {"conserved", r.conserved()},
                    {"coinbase_total_sat", r.coinbase_total},
                    {"fee_total_sat", r.fee_total},
                    {"unspent_total_sat", r.unspent_total},
                    {"fees", fees},
                    {"findings", findings}}
                   .dump(2)
            << "\n";
      } else {
        out << "transactions: " << set->size() << "\n";
        out << "coinbase total: " << r.coinbase_total << " sat\n";
        out << "fee total: " << r.fee_total << " sat\n";
        out << "unspent total: " << r.unspent_total << " sat\n";
        out << "conserved: " << (r.conserved() ? "yes" : "no") << "\n";
        for (const auto& f : r.fees) out << "fee " << f.txid << " " << f.fee << "\n";
        for (const auto& f : r.findings) out << to_string(f.kind) << " " << f.txid << ": " << f.detail << "\n";
        out << "valid: " << (r.valid() ? "yes" : "no") << "\n";
      }
      return r.valid() ? 0 : 1;
    }

    if (cluster->parsed()) {
      const auto c = load_case(case_path);
      auto params = c.heuristics;
      if (no_filter) params.apply_coinjoin_filter = false;
      const auto p = multi_input_cluster(require_chain(c), params);
      if (as_json) {
        out << to_json(p).dump(2) << "\n";
        return 0;
      }
      out << p.clusters().size() << " clusters over " << p.address_count() << " addresses (coinjoin filter "
          << (params.apply_coinjoin_filter ? "on" : "off") << ")\n";
      for (std::size_t i = 0; i < p.clusters().size(); ++i) {
        out << "cluster " << i << ":";
        for (const auto& a : p.clusters()[i]) out << " " << a;
        out << "\n";
        for (const auto& m : p.merges_in(i)) out << "  " << m.left << " + " << m.right << " via " << m.txid << "\n";
      }
      return 0;
    }

    if (trace->parsed()) {
      const auto c = load_case(case_path);
      const auto paths = trace_flows(require_chain(c), {from.begin(), from.end()}, {to.begin(), to.end()}, max_hops);
      for (const auto& p : paths) {
        for (std::size_t i = 0; i < p.txids.size(); ++i) out << (i ? " -> " : "") << p.txids[i];
        out << "\n";
      }
      if (paths.empty()) out << "no paths\n";
      return 0;
    }

    if (auto_args->parsed()) {
      auto c = load_case(case_path);
      const auto added = auto_instantiate(c);
      save_case(c, case_path);
      for (const auto& a : added) out << a.arg_id << "\t" << a.scheme_id << "\t" << a.conclusion.to_string() << "\n";
      out << added.size() << " arguments added\n";
      return 0;
    }

    if (instantiate_cmd->parsed()) {
      auto c = load_case(case_path);
      Bindings b;
      for (const auto& kv : binds) {
        auto [k, v] = split_once(kv, '=', "binding");
        b[k] = v;
      }
      InstantiateOptions opts;
      opts.arg_id = arg_id;
      for (const auto& s : supports) {
        auto [idx, ref] = split_once(s, '=', "support");
        auto [kind, target] = split_once(ref, ':', "support");
        std::size_t i = 0;
        try {
          i = std::stoul(idx);
        } catch (const std::exception&) {
          throw std::invalid_argument("support index '" + idx + "' is not a number");
        }
        if (kind == "evidence") {
          opts.support[i] = {Support::Kind::evidence, target};
        } else if (kind == "argument") {
          opts.support[i] = {Support::Kind::argument, target};
        } else {
          throw std::invalid_argument("support kind must be evidence or argument");
        }
      }
      const auto a = instantiate(c, scheme_id, b, opts);
      save_case(c, case_path);
      out << a.arg_id << "\t" << a.conclusion.to_string() << "\n";
      return 0;
    }

    if (cq_list->parsed()) {
      print_cqs(out, list_cqs(load_case(case_path), !all));
      return 0;
    }

    if (cq_answer->parsed()) {
      auto c = load_case(case_path);
      answer_cq(c, arg_id, cq_id, *cq_state_from_string(answer), why);
      save_case(c, case_path);
      const auto e = evaluate(c, fw_options);
      print_evaluation(out, e, style);
      return 0;
    }

    if (evaluate_cmd->parsed()) {
      const auto c = load_case(case_path);
      const auto e = evaluate(c, fw_options);
      if (semantics == "grounded") {
        if (as_json) {
          out << to_json(e).dump(2) << "\n";
        } else {
          print_evaluation(out, e, style);
        }
        return 0;
      }
      const auto labellings = complete_labellings(e.af);
      if (as_json) {
        json all_labs = json::array();
        for (const auto& lab : labellings) {
          json statements = json::object();
          for (const auto& st : e.statuses) {
            statements[st.statement.to_string()] = to_string(statement_status(c, e.af, lab, st.statement));
          }
          all_labs.push_back({{"labelling", to_json(e.af, lab)},
                              {"statements", statements},
                              {"grounded", lab == e.labelling}});
        }
        out << json{{"semantics", "complete"}, {"labellings", all_labs}}.dump(2) << "\n";
        return 0;
      }
      out << labellings.size() << " complete labellings\n";
      for (std::size_t k = 0; k < labellings.size(); ++k) {
        const auto& lab = labellings[k];
        out << "\nlabelling " << k + 1 << (lab == e.labelling ? " (grounded)" : "") << "\n";
        std::vector<std::vector<std::string>> rows{{"STATEMENT", "STATUS"}};
        for (const auto& st : e.statuses) {
          rows.push_back({st.statement.to_string(), style.label(statement_status(c, e.af, lab, st.statement))});
        }
        print_table(out, rows);
      }
      return 0;
    }

    if (report->parsed()) {
      const auto c = load_case(case_path);
      const auto r = generate_report(c, evaluate(c, fw_options));
      if (format == "md") {
        out << render_markdown(r);
      } else {
        out << to_json(r).dump(2) << "\n";
      }
      return 0;
    }

    if (export_af->parsed()) {
      const auto c = load_case(case_path);
      const auto af = build_framework(c, fw_options);
      if (format == "apx") {
        out << to_apx(af);
      } else {
        out << to_json(af).dump(2) << "\n";
      }
      return 0;
    }

    if (serve->parsed()) {
      ServiceOptions opts;
      opts.case_dir = case_dir;
      if (!ui_dir.empty()) opts.ui_dir = ui_dir;
      Service service(std::move(opts));
      service.bind(host, port);
      g_service = &service;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      err << "serving " << case_dir << " on http://" << host << ":" << port << "\n";
      service.serve();
      g_service = nullptr;
      return 0;
    }

    if (list->parsed()) {
      CaseStore store(case_dir);
      for (const auto& id : store.list()) {
        const auto c = store.get(id);
        out << id << "\t" << c->arguments.size() << " arguments\t" << c->title << "\n";
      }
      return 0;
    }

    if (show->parsed()) {
      out << case_to_json(load_case(case_path)).dump(2) << "\n";
      return 0;
    }

    if (arguments->parsed()) {
      const auto c = load_case(case_path);
      const auto e = evaluate(c, fw_options);
      json args = json::array();
      for (const auto& a : c.arguments) {
        auto j = to_json(a);
        j["label"] = to_string(e.label_of(a.arg_id));
        args.push_back(std::move(j));
      }
      out << json{{"arguments", args}}.dump(2) << "\n";
      return 0;
    }

    if (catalog_cmd->parsed()) {
      if (as_json) {
        out << catalog_json().dump(2) << "\n";
        return 0;
      }
      for (const auto& s : catalog()) {
        out << s.scheme_id << ": " << s.name << "\n";
        for (const auto& p : s.premises) out << "  premise: " << p.text.plain() << "\n";
        out << "  conclusion: " << s.conclusion.text.plain() << "\n";
        for (const auto& q : s.cqs) out << "  " << q.cq_id << " (" << to_string(q.kind) << "): " << q.text.plain() << "\n";
      }
      return 0;
    }
  } catch (const std::exception& e) {
    err << "chainarg: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace chainarg
