#include <gtest/gtest.h>

#include "http_harness.hpp"
#include "doc_corpus.hpp"
#include "quarry/csv.hpp"
#include "quarry/error.hpp"
#include "quarry/http_api.hpp"
#include "quarry/table.hpp"
#include "temp_dir.hpp"

using namespace quarry;
using namespace quarry::testing;
using json = nlohmann::json;

namespace {

std::string pdf_string(const Paper& p, PaperLayout* layout = nullptr) {
  auto bytes = paper_pdf(p, layout);
  return {bytes.begin(), bytes.end()};
}

ServiceConfig fast_config(const TempDir& dir) {
  ServiceConfig cfg;
  cfg.data_dir = dir.str();
  cfg.password_cost = auth::PasswordCost::minimum();
  return cfg;
}

class HttpTest : public ::testing::Test {
 protected:
  HttpTest() : svc(fast_config(dir)), server(svc), owner(server.port()), member(server.port()), outsider(server.port()) {
    owner.signup("owner");
    member_id = member.signup("member");
    outsider.signup("outsider");
    team = owner.post("/teams", {{"name", "Lab"}}).json().at("team_id");
    EXPECT_EQ(owner.post("/teams/" + team + "/members", {{"username", "member"}, {"role", "Member"}}).status, 201);
    project = owner.post("/projects", {{"team_id", team}, {"name", "Granites"}}).json().at("project_id");
  }

  std::string import(const Paper& p, PaperLayout* layout = nullptr) {
    auto r = member.upload("/projects/" + project + "/files", {{p.title + ".pdf", pdf_string(p, layout)}});
    EXPECT_EQ(r.status, 201) << r.body;
    return r.json().at("imported").at(0).at("doc_id");
  }

  TempDir dir;
  Service svc;
  TestServer server;
  ApiClient owner, member, outsider;
  std::string member_id, team, project;
};

void expect_error(const Reply& r, int status, const std::string& code) {
  EXPECT_EQ(r.status, status) << r.body;
  auto j = r.json();
  EXPECT_EQ(j.at("code"), code) << r.body;
  EXPECT_TRUE(j.at("message").is_string());
  EXPECT_TRUE(j.at("details").is_object());
}

}  // namespace

TEST(HttpStatus, Mapping) {
  EXPECT_EQ(http_status(ErrorCode::Unauthenticated), 401);
  EXPECT_EQ(http_status(ErrorCode::PermissionDenied), 403);
  EXPECT_EQ(http_status(ErrorCode::NotFound), 404);
  EXPECT_EQ(http_status(ErrorCode::DuplicateUsername), 409);
  EXPECT_EQ(http_status(ErrorCode::LockHeldByOther), 423);
  EXPECT_EQ(http_status(ErrorCode::InvalidSortKey), 400);
  EXPECT_EQ(http_status(ErrorCode::MalformedPdf), 422);
}

TEST_F(HttpTest, HealthAndAuth) {
  ApiClient anon(server.port());
  auto h = anon.get("/health");
  EXPECT_EQ(h.status, 200);
  EXPECT_EQ(h.json().at("status"), "ok");
  expect_error(anon.get("/teams"), 401, "Unauthenticated");
  expect_error(anon.post("/auth/login", {{"username", "owner"}, {"password", "nope"}}), 401, "InvalidCredentials");
  expect_error(anon.post("/auth/register", {{"username", "owner"}, {"password", "x"}}), 409, "DuplicateUsername");
  expect_error(anon.post("/auth/register", {{"username", "x"}}), 400, "InvalidArgument");
  expect_error(anon.get("/no/such/route"), 404, "NotFound");
  ApiClient temp(server.port());
  temp.login("member");
  EXPECT_EQ(temp.post("/auth/logout").status, 200);
  expect_error(temp.get("/teams"), 401, "Unauthenticated");
}

TEST_F(HttpTest, PermissionCasesOverHttp) {
  TempDir d2;
  Service s2(fast_config(d2));
  TestServer srv2(s2);
  auto outcomes = run_permission_cases(srv2.port(), paper_pdf(Paper{"Probe", {}, {}, {}, false, 1}));
  ASSERT_EQ(outcomes.size(), 18u);
  for (const auto& o : outcomes)
    EXPECT_TRUE(o.passed) << to_string(o.c.actor) << " " << to_string(o.c.action) << " -> " << o.status << " " << o.code;
}

TEST_F(HttpTest, TeamsAndProjects) {
  auto teams = member.get("/teams").json();
  ASSERT_EQ(teams.size(), 1u);
  EXPECT_EQ(teams[0].at("role"), "Member");
  EXPECT_EQ(owner.get("/teams/" + team + "/members").json().size(), 2u);
  expect_error(outsider.get("/teams/" + team + "/members"), 403, "PermissionDenied");
  expect_error(owner.patch("/teams/" + team + "/members/" + member_id, {{"role", "Boss"}}), 400, "InvalidArgument");
  EXPECT_EQ(owner.patch("/teams/" + team + "/members/" + member_id, {{"role", "Manager"}}).status, 200);
  EXPECT_EQ(owner.patch("/teams/" + team + "/members/" + member_id, {{"role", "Member"}}).status, 200);

  EXPECT_EQ(member.get("/projects?team_id=" + team).json().size(), 1u);
  auto p = member.get("/projects/" + project).json();
  EXPECT_EQ(p.at("name"), "Granites");
  expect_error(owner.patch("/projects/" + project + "/settings",
                           {{"labels", {{{"label_id", "x"}, {"matchers", {{{"kind", "regex"}, {"payload", "(["}}}}}}}}),
               422, "InvalidPattern");
  EXPECT_EQ(owner.del("/projects/" + project).status, 200);
  expect_error(member.get("/projects/" + project), 404, "NotFound");
  EXPECT_EQ(owner.post("/projects/" + project + "/restore").status, 200);
  EXPECT_EQ(member.get("/projects/" + project).status, 200);
}

TEST_F(HttpTest, ImportMultipartAndRaw) {
  auto good = pdf_string(Paper{"Zircon geochronology", {"A. Smith"}, {"text"}, {}, false, 1});
  auto r = member.upload("/projects/" + project + "/files", {{"a.pdf", good}, {"b.pdf", "not a pdf"}});
  EXPECT_EQ(r.status, 207);
  auto j = r.json();
  EXPECT_EQ(j.at("imported").size(), 1u);
  EXPECT_EQ(j.at("failed").at(0).at("code"), "MalformedPdf");
  expect_error(member.upload("/projects/" + project + "/files", {{"b.pdf", "junk"}}), 422, "MalformedPdf");
  expect_error(outsider.upload("/projects/" + project + "/files", {{"a.pdf", good}}), 403, "PermissionDenied");

  auto files = member.get("/projects/" + project + "/files").json();
  EXPECT_EQ(files.at("total"), 1);
  auto doc = files.at("items").at(0).at("doc_id").get<std::string>();
  EXPECT_EQ(files.at("items").at(0).at("meta").at("title"), "Zircon geochronology");
  auto pdf = member.get("/files/" + doc + "/pdf");
  EXPECT_EQ(pdf.body, good);
  EXPECT_EQ(pdf.content_type, "application/pdf");
  EXPECT_EQ(member.get("/files/" + doc + "/pages/0").status, 200);
  expect_error(member.get("/files/" + doc + "/pages/9"), 404, "PageOutOfRange");
  expect_error(member.get("/files/" + doc + "/pages/x"), 400, "InvalidArgument");
  expect_error(outsider.get("/files/" + doc), 403, "PermissionDenied");

  auto search = owner.get("/teams/" + team + "/files?q=zircon&sort=title&order=asc").json();
  EXPECT_EQ(search.at("total"), 1);
  expect_error(owner.get("/teams/" + team + "/files?sort=size"), 400, "InvalidSortKey");
  expect_error(owner.get("/teams/" + team + "/files?order=up"), 400, "InvalidArgument");
  EXPECT_EQ(member.get("/me/recent").json().at(0).at("doc_id"), doc);
  EXPECT_TRUE(member.get("/me/files").json().empty());
}

TEST_F(HttpTest, LockAndPrincipalEndpoints) {
  auto doc = import(Paper{"Basalt", {}, {}, {}, false, 1});
  EXPECT_TRUE(member.get("/files/" + doc + "/lock").json().is_null());
  auto lock = member.post("/files/" + doc + "/lock").json();
  EXPECT_EQ(lock.at("holder"), member_id);
  expect_error(owner.post("/files/" + doc + "/lock"), 423, "LockHeldByOther");
  expect_error(owner.put("/files/" + doc + "/meta", {{"title", "x"}}), 423, "LockNotHeld");
  EXPECT_EQ(member.get("/files/" + doc + "/lock").json().at("holder"), member_id);
  EXPECT_EQ(member.del("/files/" + doc + "/lock").status, 200);

  EXPECT_EQ(owner.post("/files/" + doc + "/charge").status, 200);
  expect_error(member.post("/files/" + doc + "/charge"), 409, "AlreadyAssigned");
  expect_error(member.post("/files/" + doc + "/lock"), 403, "NotPrincipal");
  EXPECT_EQ(owner.post("/files/" + doc + "/lock").status, 200);
  auto meta = owner.get("/files/" + doc + "/meta").json();
  meta["venue"] = "Lithos";
  EXPECT_EQ(owner.put("/files/" + doc + "/meta", meta).json().at("venue"), "Lithos");
  EXPECT_EQ(owner.get("/me/files").json().size(), 1u);
  EXPECT_EQ(owner.del("/files/" + doc + "/charge").status, 200);
}

TEST_F(HttpTest, TableAnnotationMapIntegrationFlow) {
  EXPECT_EQ(owner.patch("/projects/" + project + "/settings",
                        {{"labels", {{{"label_id", "rock"}, {"matchers", {{{"kind", "dictionary"}, {"payload", {"granite"}}}}}}}},
                         {"schema",
                          {{"headers", {"Sample", "SiO2", "Rock", "Lon", "Lat"}},
                           {"label_to_header", {{"rock", "Rock"}}},
                           {"map_to_header", {{"longitude", "Lon"}, {"latitude", "Lat"}}}}}})
                .status,
            200);
  PaperLayout layout;
  Paper paper{"Ridge granites", {"A. Smith"}, {"fresh granite, pink"}, {{"Sample", "SiO2"}, {"R1", "71.2"}, {"R2", "69.8"}},
              true, 3};
  auto doc = import(paper, &layout);
  ASSERT_EQ(member.post("/files/" + doc + "/lock").status, 200);

  auto detected = member.post("/files/" + doc + "/tables", {{"detect", true}, {"page_index", 0}});
  ASSERT_EQ(detected.status, 201) << detected.body;
  ASSERT_EQ(detected.json().size(), 1u);
  std::string table = detected.json().at(0).at("table_id");
  expect_error(member.post("/files/" + doc + "/tables", {{"detect", true}, {"page_index", 0}, {"detector", "magic"}}), 400,
               "UnknownDetector");
  expect_error(member.post("/tables/" + table + "/stage", {{"target", "confirmed"}}), 422, "InvalidTransition");
  for (auto st : {"structured", "filled"})
    ASSERT_EQ(member.post("/tables/" + table + "/stage", {{"target", st}}).status, 200) << st;
  auto csv_reply = member.get("/tables/" + table + "?format=csv");
  EXPECT_EQ(csv_reply.content_type, "text/csv");
  EXPECT_EQ(csv::parse(csv_reply.body), paper.table);

  auto filled = member.get("/tables/" + table).json().get<TableArtifact>();
  int span = filled.grid.span_at(1, 0);
  auto edit = member.post("/tables/" + table + "/edits", {{"op", "set_content"}, {"params", {{"span", span}, {"content", "R1a"}}}});
  EXPECT_EQ(edit.status, 200) << edit.body;
  expect_error(member.post("/tables/" + table + "/edits", {{"op", "explode"}, {"params", json::object()}}), 400,
               "InvalidArgument");
  ASSERT_EQ(member.post("/tables/" + table + "/stage", {{"target", "confirmed"}}).status, 200);

  auto log = member.get("/tables/" + table + "/log");
  EXPECT_EQ(log.content_type, "application/jsonl");
  auto entries = parse_edit_log_jsonl(log.body);
  ASSERT_EQ(entries.size(), 5u);
  EXPECT_EQ(entries[0].op, "create");
  auto stored = member.get("/tables/" + table).json().get<TableArtifact>();
  EXPECT_EQ(replay(table, doc, entries).grid, stored.grid);
  EXPECT_EQ(member.get("/files/" + doc + "/tables").json().size(), 1u);

  auto anns = member.post("/files/" + doc + "/annotations", {{"mode", "auto"}});
  ASSERT_EQ(anns.status, 200) << anns.body;
  ASSERT_EQ(anns.json().size(), 1u);
  auto manual = member.post("/files/" + doc + "/annotations", {{"page_index", 0}, {"char_span", {0, 5}}, {"label_id", "rock"}});
  EXPECT_EQ(manual.status, 201) << manual.body;
  expect_error(member.post("/files/" + doc + "/annotations", {{"page_index", 0}, {"char_span", {0, 5}}, {"label_id", "x"}}),
               422, "UnknownLabel");
  auto ann_csv = member.get("/files/" + doc + "/annotations?format=csv");
  EXPECT_EQ(ann_csv.content_type, "text/csv");
  EXPECT_EQ(csv::parse(ann_csv.body).size(), 3u);

  const auto& f = layout.map.frame;
  json region = {{"page_index", 1}, {"bbox", {f.x0, f.y0, f.x1, f.y1}}};
  auto cal = member.post("/files/" + doc + "/map/calibrate", {{"region", region}});
  ASSERT_EQ(cal.status, 201) << cal.body;
  std::string cal_id = cal.json().at("calibration_id");
  double x = (f.x0 + f.x1) / 2, y = (f.y0 + f.y1) / 2;
  auto pt = member.post("/files/" + doc + "/map/points", {{"calibration_id", cal_id}, {"pixel", {x, y}}});
  ASSERT_EQ(pt.status, 201) << pt.body;
  EXPECT_NEAR(pt.json().at("longitude").get<double>(), layout.map.lon_at(x), 0.01 * std::abs(layout.map.lon_span));
  auto pts_csv = member.get("/files/" + doc + "/map/points?format=csv");
  EXPECT_EQ(csv::parse(pts_csv.body).size(), 2u);

  // explicit ticks by label
  const auto& t = layout.map.ticks;
  json ticks = json::array();
  for (const auto& tk : t) ticks.push_back({{"pixel", tk.pixel}, {"label", tk.label}});
  EXPECT_EQ(member.post("/files/" + doc + "/map/calibrate", {{"region", region}, {"ticks", ticks}}).status, 201);

  std::string ann_id = anns.json().at(0).at("annotation_id");
  std::string pt_id = pt.json().at("point_id");
  auto ov = member.put("/files/" + doc + "/integration-override",
                       {{"points", {{{"source_id", pt_id}, {"rows", {0, 1}}}}}, {"annotations", {{{"source_id", ann_id}, {"rows", {0, 0}}}}}});
  EXPECT_EQ(ov.status, 200) << ov.body;
  auto file_csv = member.post("/files/" + doc + "/integrate?format=csv");
  auto rows = csv::parse(file_csv.body);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"Sample", "SiO2", "Rock", "Lon", "Lat"}));
  EXPECT_EQ(rows[1][0], "R1a");
  EXPECT_EQ(rows[1][2], "granite");
  EXPECT_EQ(rows[2][2], "Ridge");  // first annotation in reading order is the default

  auto proj_csv = owner.post("/projects/" + project + "/integrate");
  EXPECT_EQ(proj_csv.body, file_csv.body);
  auto prov = csv::parse(owner.post("/projects/" + project + "/integrate?part=provenance").body);
  EXPECT_EQ(prov[0], (std::vector<std::string>{"row", "header", "doc_id", "source_kind", "source_id"}));
  auto js = owner.post("/projects/" + project + "/integrate?format=json").json();
  EXPECT_EQ(js.at("rows").size(), 2u);
  expect_error(member.post("/files/" + doc + "/tables", {{"page_index", 7}, {"bbox", {0, 0, 10, 10}}}), 404,
               "PageOutOfRange");
}
