#include "chainarg/service.hpp"

#include <algorithm>
#include <regex>
#include <stdexcept>

#include <httplib.h>

#include "chainarg/engine.hpp"
#include "chainarg/error.hpp"
#include "chainarg/heuristics.hpp"
#include "chainarg/report.hpp"

namespace chainarg {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {
constexpr std::string_view kCaseSuffix = ".case.json";
}

bool valid_case_id(std::string_view id) {
  static const std::regex re("[A-Za-z0-9][A-Za-z0-9_.-]*");
  return !id.empty() && id.size() <= 128 && std::regex_match(id.begin(), id.end(), re);
}

CaseStore::CaseStore(fs::path dir, std::chrono::milliseconds write_timeout)
    : dir_(std::move(dir)), write_timeout_(write_timeout) {
  if (!fs::is_directory(dir_)) throw LookupError("case directory " + dir_.string() + " does not exist");
}

fs::path CaseStore::path_of(const std::string& case_id) const { return dir_ / (case_id + std::string(kCaseSuffix)); }

std::vector<std::string> CaseStore::list() const {
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(dir_)) {
    if (!entry.is_regular_file()) continue;
    const auto name = entry.path().filename().string();
    if (name.size() <= kCaseSuffix.size() || !name.ends_with(kCaseSuffix)) continue;
    auto id = name.substr(0, name.size() - kCaseSuffix.size());
    if (valid_case_id(id)) ids.push_back(std::move(id));
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::shared_ptr<CaseStore::Slot> CaseStore::slot(const std::string& case_id) {
  if (!valid_case_id(case_id)) throw NotFoundError("no case " + case_id);
  std::lock_guard lock(slots_mu_);
  auto& s = slots_[case_id];
  if (!s) s = std::make_shared<Slot>();
  return s;
}

std::shared_ptr<const CaseFile> CaseStore::get(const std::string& case_id) {
  auto s = slot(case_id);
  std::lock_guard lock(s->guard);
  if (!s->snapshot) {
    const auto path = path_of(case_id);
    if (!fs::exists(path)) throw NotFoundError("no case " + case_id);
    auto c = load_case(path);
    if (c.case_id != case_id) {
      throw IntegrityError("case file " + path.string() + " declares case_id " + c.case_id);
    }
    s->snapshot = std::make_shared<const CaseFile>(std::move(c));
  }
  return s->snapshot;
}

std::shared_ptr<const CaseFile> CaseStore::create(CaseFile c) {
  if (!valid_case_id(c.case_id)) throw IntegrityError("case id '" + c.case_id + "' is not usable as a file name");
  auto s = slot(c.case_id);
  std::unique_lock writer(s->writer, std::defer_lock);
  if (!writer.try_lock_for(write_timeout_)) throw BusyError("case " + c.case_id + " is being written");
  {
    std::lock_guard lock(s->guard);
    if (s->snapshot || fs::exists(path_of(c.case_id))) throw IntegrityError("case " + c.case_id + " already exists");
  }
  check_case(c);
  save_case(c, path_of(c.case_id));
  auto snap = std::make_shared<const CaseFile>(std::move(c));
  std::lock_guard lock(s->guard);
  s->snapshot = snap;
  return snap;
}

std::shared_ptr<const CaseFile> CaseStore::mutate(const std::string& case_id,
                                                  const std::function<void(CaseFile&)>& fn) {
  auto s = slot(case_id);
  std::unique_lock writer(s->writer, std::defer_lock);
  if (!writer.try_lock_for(write_timeout_)) throw BusyError("case " + case_id + " is being written");

  const auto current = get(case_id);
  CaseFile next = *current;
  fn(next);
  next.revision = current->revision + 1;
  check_case(next);
  save_case(next, path_of(case_id));

  auto snap = std::make_shared<const CaseFile>(std::move(next));
  std::lock_guard lock(s->guard);
  s->snapshot = snap;
  return snap;
}

std::shared_ptr<const Evaluation> CaseStore::evaluation(const std::string& case_id) {
  const auto snap = get(case_id);
  auto s = slot(case_id);
  std::lock_guard lock(s->guard);
  if (s->snapshot != snap) return std::make_shared<const Evaluation>(evaluate(*snap));
  if (!s->evaluation || s->evaluated_revision != snap->revision) {
    s->evaluation = std::make_shared<const Evaluation>(evaluate(*snap));
    s->evaluated_revision = snap->revision;
  }
  return s->evaluation;
}

namespace {

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(2) + "\n", "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view kind, const std::string& message) {
  send_json(res, {{"error", kind}, {"message", message}}, status);
}

json parse_body(const httplib::Request& req) {
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    const auto [line, column] = line_column(req.body, e.byte == 0 ? 0 : e.byte - 1);
    throw ParseError("malformed request body", line, column);
  }
}

using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

// Maps domain errors to HTTP statuses.
Handler guarded(Handler h) {
  return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
    try {
      h(req, res);
    } catch (const BusyError& e) {
      res.set_header("Retry-After", "1");
      send_error(res, 503, "busy", e.what());
    } catch (const NotFoundError& e) {
      send_error(res, 404, "not_found", e.what());
    } catch (const IntegrityError& e) {
      send_error(res, 409, "integrity", e.what());
    } catch (const VersionError& e) {
      send_error(res, 400, "version", e.what());
    } catch (const ParseError& e) {
      send_error(res, 400, "parse", e.what());
    } catch (const SchemaError& e) {
      send_error(res, 400, "schema", e.what());
    } catch (const BindingError& e) {
      send_error(res, 400, "binding", e.what());
    } catch (const GroundingError& e) {
      send_error(res, 400, "grounding", e.what());
    } catch (const LookupError& e) {
      send_error(res, 400, "lookup", e.what());
    } catch (const std::invalid_argument& e) {
      send_error(res, 400, "invalid", e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "internal", e.what());
    }
  };
}

std::string param(const httplib::Request& req, const char* name, const std::string& fallback) {
  return req.has_param(name) ? req.get_param_value(name) : fallback;
}

json evaluation_body(const CaseFile& c, const Evaluation& e) {
  auto body = to_json(e);
  body["case_id"] = c.case_id;
  body["revision"] = c.revision;
  return body;
}

Support support_from_json(const json& j) {
  if (!j.is_object() || j.size() != 1) throw SchemaError("support entries look like {\"evidence\": id}");
  const auto& [kind, ref] = *j.items().begin();
  if (!ref.is_string()) throw SchemaError("support reference must be a string");
  if (kind == "evidence") return {Support::Kind::evidence, ref.get<std::string>()};
  if (kind == "argument") return {Support::Kind::argument, ref.get<std::string>()};
  throw SchemaError("support kind must be 'evidence' or 'argument'");
}

}  // namespace

struct Service::Impl {
  explicit Impl(ServiceOptions o) : options(std::move(o)), store(options.case_dir, options.write_timeout) {
    // httplib's default sets SO_REUSEPORT, which lets a second server share a busy port.
    server.set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
    });
  }

  void routes();

  ServiceOptions options;
  CaseStore store;
  httplib::Server server;
};

void Service::Impl::routes() {
  auto& s = server;
  auto& st = store;
  const std::string id = "/api/cases/([^/]+)";

  s.Get("/api/cases", guarded([&st](const httplib::Request&, httplib::Response& res) {
          json cases = json::array();
          for (const auto& cid : st.list()) {
            try {
              const auto c = st.get(cid);
              cases.push_back({{"case_id", c->case_id},
                               {"title", c->title},
                               {"arguments", c->arguments.size()},
                               {"evidence", c->evidence.size()}});
            } catch (const Error& e) {
              cases.push_back({{"case_id", cid}, {"error", e.what()}});
            }
          }
          send_json(res, {{"cases", cases}});
        }));

  s.Post("/api/cases", guarded([&st](const httplib::Request& req, httplib::Response& res) {
           const auto c = st.create(case_from_json(parse_body(req), st.dir()));
           send_json(res, case_to_json(*c), 201);
         }));

  s.Get(id, guarded([&st](const httplib::Request& req, httplib::Response& res) {
          send_json(res, case_to_json(*st.get(req.matches[1])));
        }));

  s.Get(id + "/clusters", guarded([&st](const httplib::Request& req, httplib::Response& res) {
          const auto c = st.get(req.matches[1]);
          if (c->transactions() == nullptr) throw NotFoundError("case " + c->case_id + " has no chain");
          auto params = c->heuristics;
          const auto filter = param(req, "coinjoin_filter", "on");
          if (filter != "on" && filter != "off") throw std::invalid_argument("coinjoin_filter must be on or off");
          params.apply_coinjoin_filter = filter == "on";
          auto body = to_json(multi_input_cluster(*c->transactions(), params));
          body["coinjoin_filter"] = params.apply_coinjoin_filter;
          send_json(res, body);
        }));

  s.Get(id + "/arguments", guarded([&st](const httplib::Request& req, httplib::Response& res) {
          const auto c = st.get(req.matches[1]);
          const auto e = st.evaluation(req.matches[1]);
          json args = json::array();
          for (const auto& a : c->arguments) {
            auto j = to_json(a);
            j["label"] = to_string(e->label_of(a.arg_id));
            args.push_back(std::move(j));
          }
          send_json(res, {{"arguments", args}});
        }));

  s.Post(id + "/arguments", guarded([&st](const httplib::Request& req, httplib::Response& res) {
           const auto body = parse_body(req);
           if (!body.is_object() || !body.contains("scheme_id") || !body["scheme_id"].is_string()) {
             throw SchemaError("body needs a string scheme_id");
           }
           Bindings bindings;
           if (body.contains("bindings")) {
             if (!body["bindings"].is_object()) throw SchemaError("bindings must be an object");
             for (const auto& [k, v] : body["bindings"].items()) {
               if (!v.is_string()) throw SchemaError("binding " + k + " must be a string");
               bindings[k] = v.get<std::string>();
             }
           }
           InstantiateOptions opts;
           if (body.contains("arg_id")) opts.arg_id = body["arg_id"].get<std::string>();
           if (body.contains("support")) {
             for (const auto& [k, v] : body["support"].items()) {
               std::size_t idx = 0;
               try {
                 idx = std::stoul(k);
               } catch (const std::exception&) {
                 throw SchemaError("support keys are premise indexes");
               }
               opts.support[idx] = support_from_json(v);
             }
           }
           std::string created;
           st.mutate(req.matches[1], [&](CaseFile& c) {
             created = instantiate(c, body["scheme_id"].get<std::string>(), bindings, opts).arg_id;
           });
           send_json(res, to_json(*st.get(req.matches[1])->find_argument(created)), 201);
         }));

  s.Get(id + "/framework", guarded([&st](const httplib::Request& req, httplib::Response& res) {
          const auto e = st.evaluation(req.matches[1]);
          const auto format = param(req, "format", "json");
          if (format == "apx") {
            res.set_content(to_apx(e->af), "text/plain");
          } else if (format == "json") {
            send_json(res, to_json(e->af));
          } else {
            throw std::invalid_argument("format must be json or apx");
          }
        }));

  s.Get(id + "/evaluation", guarded([&st](const httplib::Request& req, httplib::Response& res) {
          const auto c = st.get(req.matches[1]);
          send_json(res, evaluation_body(*c, *st.evaluation(req.matches[1])));
        }));

  s.Get(id + "/cqs", guarded([&st](const httplib::Request& req, httplib::Response& res) {
          const auto status = param(req, "status", "open");
          if (status != "open" && status != "all") throw std::invalid_argument("status must be open or all");
          json cqs = json::array();
          for (const auto& q : list_cqs(*st.get(req.matches[1]), status == "open")) {
            cqs.push_back({{"arg_id", q.arg_id},
                           {"cq_id", q.cq_id},
                           {"kind", to_string(q.kind)},
                           {"state", to_string(q.state)},
                           {"text", q.text},
                           {"justification", q.justification}});
          }
          send_json(res, {{"cqs", cqs}});
        }));

  s.Post(id + "/arguments/([^/]+)/cqs/([^/]+)/answer",
         guarded([&st](const httplib::Request& req, httplib::Response& res) {
           const auto body = parse_body(req);
           if (!body.is_object() || !body.contains("answer") || !body["answer"].is_string()) {
             throw SchemaError("body needs a string answer");
           }
           const auto answer = cq_state_from_string(body["answer"].get<std::string>());
           if (!answer || *answer == CqState::open) throw std::invalid_argument("answer must be favourable or unfavourable");
           std::string why;
           if (body.contains("justification")) {
             if (!body["justification"].is_string()) throw SchemaError("justification must be a string");
             why = body["justification"].get<std::string>();
           }
           const std::string arg = req.matches[2];
           const std::string cq = req.matches[3];
           const auto c = st.mutate(req.matches[1], [&](CaseFile& c) { answer_cq(c, arg, cq, *answer, why); });
           send_json(res, evaluation_body(*c, *st.evaluation(req.matches[1])));
         }));

  s.Post(id + "/auto-instantiate", guarded([&st](const httplib::Request& req, httplib::Response& res) {
           std::vector<Argument> added;
           st.mutate(req.matches[1], [&](CaseFile& c) { added = auto_instantiate(c); });
           json args = json::array();
           for (const auto& a : added) args.push_back(to_json(a));
           send_json(res, {{"added", args}});
         }));

  s.Get(id + "/report", guarded([&st](const httplib::Request& req, httplib::Response& res) {
          const auto c = st.get(req.matches[1]);
          const auto report = generate_report(*c, *st.evaluation(req.matches[1]));
          const auto format = param(req, "format", "json");
          if (format == "md") {
            res.set_content(render_markdown(report), "text/markdown");
          } else if (format == "json") {
            send_json(res, to_json(report));
          } else {
            throw std::invalid_argument("format must be json or md");
          }
        }));

  s.Get("/api/schemes", guarded([](const httplib::Request&, httplib::Response& res) {
          send_json(res, catalog_json());
        }));

  if (options.ui_dir) {
    if (!s.set_mount_point("/", options.ui_dir->string())) {
      throw LookupError("ui directory " + options.ui_dir->string() + " does not exist");
    }
  }
}

Service::Service(ServiceOptions options) : impl_(std::make_unique<Impl>(std::move(options))) { impl_->routes(); }

Service::~Service() { stop(); }

CaseStore& Service::store() { return impl_->store; }

void Service::bind(const std::string& host, int port) {
  if (!impl_->server.bind_to_port(host, port)) {
    throw LookupError("cannot listen on " + host + ":" + std::to_string(port) + " (port busy?)");
  }
}

int Service::bind_any_port(const std::string& host) {
  const int port = impl_->server.bind_to_any_port(host);
  if (port < 0) throw LookupError("cannot bind any port on " + host);
  return port;
}

void Service::serve() { impl_->server.listen_after_bind(); }

void Service::wait_until_ready() const { impl_->server.wait_until_ready(); }

void Service::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

bool Service::running() const { return impl_->server.is_running(); }

}  // namespace chainarg
