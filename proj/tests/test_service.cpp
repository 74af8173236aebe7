#include <doctest.h>

#include <httplib.h>

#include <future>
#include <thread>

#include "chainarg/service.hpp"
#include "chainarg/error.hpp"
#include "support.hpp"

using namespace chainarg;
using nlohmann::json;

namespace {

// A service on an ephemeral port over a scratch copy of the WSM case.
struct Running {
  explicit Running(std::chrono::milliseconds write_timeout = std::chrono::milliseconds(2000))
      : service(ServiceOptions{dir.path(), std::nullopt, write_timeout}) {
    testing::copy_wsm(dir.path());
    port = service.bind_any_port("127.0.0.1");
    thread = std::thread([this] { service.serve(); });
    service.wait_until_ready();
  }
  ~Running() {
    service.stop();
    thread.join();
  }

  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port);
    c.set_read_timeout(10, 0);
    return c;
  }

  testing::TempDir dir;
  Service service;
  int port = 0;
  std::thread thread;
};

json body_of(const httplib::Result& r) {
  REQUIRE(r);
  return json::parse(r->body);
}

std::string status_in(const json& evaluation, const std::string& statement) {
  for (const auto& s : evaluation["statements"]) {
    if (s["statement"] == statement) return s["status"];
  }
  return "missing";
}

const std::string kFinal = "connected(X,WSM-administration)";

}  // namespace

TEST_CASE("read-only routes") {
  Running svc;
  auto cli = svc.client();

  auto list = body_of(cli.Get("/api/cases"));
  REQUIRE(list["cases"].size() == 1);
  CHECK(list["cases"][0]["case_id"] == "wsm");

  auto one = cli.Get("/api/cases/wsm");
  REQUIRE(one);
  CHECK(one->status == 200);
  CHECK(json::parse(one->body)["case_id"] == "wsm");

  auto eval = body_of(cli.Get("/api/cases/wsm/evaluation"));
  CHECK(eval["semantics"] == "grounded");
  CHECK(eval["labelling"]["a_final"].is_string());
  CHECK(status_in(eval, kFinal) == "IN");

  auto args = body_of(cli.Get("/api/cases/wsm/arguments"));
  CHECK(args["arguments"].size() == 14);
  CHECK(args["arguments"][0].contains("label"));

  auto on = body_of(cli.Get("/api/cases/wsm/clusters"));
  auto off = body_of(cli.Get("/api/cases/wsm/clusters?coinjoin_filter=off"));
  CHECK(on["coinjoin_filter"] == true);
  CHECK(off["coinjoin_filter"] == false);
  CHECK(on["clusters"].size() >= off["clusters"].size());

  auto apx = cli.Get("/api/cases/wsm/framework?format=apx");
  REQUIRE(apx);
  CHECK(apx->body.find("arg(a_final).") != std::string::npos);
  CHECK(body_of(cli.Get("/api/cases/wsm/framework"))["nodes"].is_array());

  auto open = body_of(cli.Get("/api/cases/wsm/cqs"));
  auto all = body_of(cli.Get("/api/cases/wsm/cqs?status=all"));
  CHECK(open["cqs"].size() < all["cqs"].size());

  auto md = cli.Get("/api/cases/wsm/report?format=md");
  REQUIRE(md);
  CHECK(md->body.starts_with("# Suspicion report"));
  CHECK(body_of(cli.Get("/api/cases/wsm/report"))["case_id"] == "wsm");

  CHECK(body_of(cli.Get("/api/schemes")).size() == 7);

  auto bad = cli.Get("/api/cases/wsm/framework?format=dot");
  REQUIRE(bad);
  CHECK(bad->status == 400);
}

TEST_CASE("errors carry a JSON body") {
  Running svc;
  auto cli = svc.client();
  auto missing = cli.Get("/api/cases/nope");
  REQUIRE(missing);
  CHECK(missing->status == 404);
  CHECK(json::parse(missing->body)["error"] == "not_found");

  auto no_cq = cli.Post("/api/cases/wsm/arguments/a_mi/cqs/cq9/answer",
                        R"({"answer": "unfavourable", "justification": "x"})", "application/json");
  REQUIRE(no_cq);
  CHECK(no_cq->status == 404);
  const auto body = json::parse(no_cq->body);
  CHECK(body["error"] == "not_found");
  CHECK(body["message"].get<std::string>().find("cq9") != std::string::npos);

  auto bad_json = cli.Post("/api/cases/wsm/arguments/a_mi/cqs/cq1/answer", "{", "application/json");
  REQUIRE(bad_json);
  CHECK(bad_json->status == 400);

  auto bad_answer = cli.Post("/api/cases/wsm/arguments/a_mi/cqs/cq1/answer", R"({"answer": "maybe"})",
                             "application/json");
  REQUIRE(bad_answer);
  CHECK(bad_answer->status == 400);
}

TEST_CASE("answering a CQ re-evaluates and persists") {
  Running svc;
  auto cli = svc.client();
  auto r = cli.Post("/api/cases/wsm/arguments/a_mi/cqs/cq1/answer",
                    R"({"answer": "unfavourable", "justification": "equal-output pattern found"})",
                    "application/json");
  REQUIRE(r);
  CHECK(r->status == 200);
  const auto eval = json::parse(r->body);
  CHECK(eval["labelling"]["a_mi"] == "OUT");
  CHECK(status_in(eval, kFinal) != "IN");

  // Read-your-writes through every view.
  CHECK(status_in(body_of(cli.Get("/api/cases/wsm/evaluation")), kFinal) != "IN");
  const auto cqs = body_of(cli.Get("/api/cases/wsm/cqs?status=all"));
  bool seen = false;
  for (const auto& q : cqs["cqs"]) {
    if (q["arg_id"] == "a_mi" && q["cq_id"] == "cq1") {
      seen = true;
      CHECK(q["state"] == "unfavourable");
    }
  }
  CHECK(seen);
  const auto on_disk = load_case(svc.dir / "wsm.case.json");
  CHECK(on_disk.find_argument("a_mi")->cq_state.at("cq1").state == CqState::unfavourable);
  CHECK(on_disk.cq_answers.back().justification == "equal-output pattern found");
}

TEST_CASE("creating cases and arguments") {
  Running svc;
  auto cli = svc.client();
  auto doc = case_to_json(testing::mini_case());
  auto created = cli.Post("/api/cases", doc.dump(), "application/json");
  REQUIRE(created);
  CHECK(created->status == 201);
  auto again = cli.Post("/api/cases", doc.dump(), "application/json");
  REQUIRE(again);
  CHECK(again->status == 409);
  CHECK(body_of(cli.Get("/api/cases"))["cases"].size() == 2);

  const json arg = {{"scheme_id", "suspicion-through-address-control"},
                    {"bindings", {{"E", "E"}, {"A", "a"}, {"O", "O"}}},
                    {"arg_id", "s1"},
                    {"support", {{"1", {{"evidence", "ev_a"}}}}}};
  auto made = cli.Post("/api/cases/mini/arguments", arg.dump(), "application/json");
  REQUIRE(made);
  CHECK(made->status == 201);
  auto dup = cli.Post("/api/cases/mini/arguments", arg.dump(), "application/json");
  REQUIRE(dup);
  CHECK(dup->status == 409);

  json unbound = arg;
  unbound["bindings"].erase("O");
  unbound["arg_id"] = "s2";
  auto r = cli.Post("/api/cases/mini/arguments", unbound.dump(), "application/json");
  REQUIRE(r);
  CHECK(r->status == 400);
  CHECK(json::parse(r->body)["error"] == "binding");

  auto added = body_of(cli.Post("/api/cases/mini/auto-instantiate", "", "application/json"));
  CHECK(added["added"].size() == 2);
  CHECK(body_of(cli.Get("/api/cases/mini/arguments"))["arguments"].size() == 3);
}

TEST_CASE("a held writer lock yields 503 with Retry-After") {
  Running svc(std::chrono::milliseconds(100));
  std::promise<void> entered;
  std::promise<void> release;
  auto holder = std::async(std::launch::async, [&] {
    svc.service.store().mutate("wsm", [&](CaseFile&) {
      entered.set_value();
      release.get_future().wait();
    });
  });
  entered.get_future().wait();

  auto cli = svc.client();
  auto busy = cli.Post("/api/cases/wsm/arguments/a_mi/cqs/cq1/answer",
                       R"({"answer": "favourable", "justification": "x"})", "application/json");
  REQUIRE(busy);
  CHECK(busy->status == 503);
  CHECK(busy->get_header_value("Retry-After") == "1");
  CHECK(json::parse(busy->body)["error"] == "busy");
  // Readers are not blocked by the writer.
  auto read = cli.Get("/api/cases/wsm/evaluation");
  REQUIRE(read);
  CHECK(read->status == 200);

  release.set_value();
  holder.get();
  auto ok = cli.Post("/api/cases/wsm/arguments/a_mi/cqs/cq1/answer",
                     R"({"answer": "favourable", "justification": "x"})", "application/json");
  REQUIRE(ok);
  CHECK(ok->status == 200);
}

TEST_CASE("concurrent writers to one case are serialized") {
  Running svc;
  std::vector<std::future<int>> results;
  for (int i = 0; i < 8; ++i) {
    results.push_back(std::async(std::launch::async, [&, i] {
      auto cli = svc.client();
      const json body = {{"answer", i % 2 ? "favourable" : "unfavourable"}, {"justification", std::to_string(i)}};
      auto r = cli.Post("/api/cases/wsm/arguments/a_final/cqs/cq3/answer", body.dump(), "application/json");
      return r ? r->status : -1;
    }));
  }
  for (auto& f : results) CHECK(f.get() == 200);
  const auto c = load_case(svc.dir / "wsm.case.json");
  const auto base = testing::load_wsm().cq_answers.size();
  REQUIRE(c.cq_answers.size() == base + 8);
  for (std::size_t i = base + 1; i < c.cq_answers.size(); ++i) CHECK(c.cq_answers[i].seq == c.cq_answers[i - 1].seq + 1);
}

TEST_CASE("binding a busy port fails") {
  testing::TempDir dir;
  Service a(ServiceOptions{dir.path(), std::nullopt, std::chrono::milliseconds(2000)});
  const int port = a.bind_any_port("127.0.0.1");
  Service b(ServiceOptions{dir.path(), std::nullopt, std::chrono::milliseconds(2000)});
  CHECK_THROWS_AS(b.bind("127.0.0.1", port), LookupError);
}

TEST_CASE("case store") {
  testing::TempDir dir;
  CaseStore store(dir.path());
  CHECK(store.list().empty());
  CHECK_THROWS_AS(store.get("mini"), NotFoundError);
  store.create(testing::mini_case());
  CHECK(store.list() == std::vector<std::string>{"mini"});
  const auto before = store.get("mini");
  const auto e1 = store.evaluation("mini");
  CHECK(store.evaluation("mini") == e1);
  store.mutate("mini", [](CaseFile& c) { auto_instantiate(c); });
  CHECK(before->arguments.empty());
  CHECK(store.get("mini")->arguments.size() == 2);
  CHECK(store.evaluation("mini") != e1);
  CHECK_THROWS_AS(store.mutate("mini", [](CaseFile& c) { c.arguments.push_back(Argument{}); }), IntegrityError);
  CHECK(store.get("mini")->arguments.size() == 2);
  CHECK(valid_case_id("wsm.v2"));
  CHECK_FALSE(valid_case_id("../x"));
  CHECK_FALSE(valid_case_id(""));
}

TEST_CASE("ui directory is served statically") {
  testing::TempDir dir;
  testing::TempDir ui;
  write_file(ui / "index.html", "<html>console</html>");
  Service service(ServiceOptions{dir.path(), ui.path(), std::chrono::milliseconds(2000)});
  const int port = service.bind_any_port("127.0.0.1");
  std::thread t([&] { service.serve(); });
  service.wait_until_ready();
  httplib::Client cli("127.0.0.1", port);
  auto r = cli.Get("/index.html");
  REQUIRE(r);
  CHECK(r->body == "<html>console</html>");
  service.stop();
  t.join();
}
