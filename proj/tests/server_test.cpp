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


#include "crx/server.hpp"

#include <gtest/gtest.h>

#include <thread>

#include "crx/scopus.hpp"
#include "crx/wos.hpp"
#include "support.hpp"

namespace crx::server {
namespace {

constexpr const char* kWos =
    "FN x\nVR 1.0\n"
    "PT J\nTI one\n"
    "CR GARFIELD E, 1955, SCIENCE, V122, P108\n"
    "   GARFELD E, 1955, SCIENCE, V122, P108\n"
    "   PRICE DJD, 1965, SCIENCE, V149, P510\n"
    "   1999, NATURE\n"
    "   ANON, [no year]\n"
    "NR 5\nUT WOS:1\nER\n"
    "PT J\nTI two\n"
    "CR GARFIELD E, 1955, SCIENCE, V122, P108\n"
    "   MERTON RK, 1968, SCIENCE, V159, P56\n"
    "   1999, NATURE\n"
    "NR 3\nUT WOS:2\nER\nEF\n";

class ServerTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = testing::temp_dir("server");
    path_ = dir_ / "state.cre";
    cre::WorkingState st = cre::fresh_state(wos::parse_wos(kWos));
    cre::save_cre_file(st, path_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }

  CrId id_of(const CurationService& svc, std::string_view raw_prefix) {
    for (const auto& [id, cr] : svc.snapshot().dataset.crs) {
      if (cr.raw.rfind(raw_prefix, 0) == 0) return id;
    }
    ADD_FAILURE() << raw_prefix;
    return {};
  }

  std::filesystem::path dir_;
  std::filesystem::path path_;
};

TEST_F(ServerTest, AuthorsSortPutsEmptyAuthorsLast) {
  auto svc = CurationService::open(path_);
  for (const char* dir : {"asc", "desc"}) {
    ApiResponse r = svc.list_crs("authors", dir, "", "");
    ASSERT_EQ(r.status, 200);
    const auto& rows = r.body["rows"];
    ASSERT_EQ(rows.size(), 6u);
    EXPECT_TRUE(rows.back()["authors"].empty()) << dir;
    std::vector<std::string> names;
    for (const auto& row : rows) {
      if (!row["authors"].empty()) names.push_back(row["authors"][0]);
    }
    std::vector<std::string> expected = {"ANON", "GARFELD E", "GARFIELD E", "MERTON RK",
                                         "PRICE DJD"};
    if (std::string(dir) == "desc") std::reverse(expected.begin(), expected.end());
    EXPECT_EQ(names, expected);
  }
}

TEST_F(ServerTest, OtherSortKeysAndValidation) {
  auto svc = CurationService::open(path_);
  auto r = svc.list_crs("n_cr", "desc", "", "");
  EXPECT_EQ(r.body["rows"][0]["n_cr"], 2);
  r = svc.list_crs("rpy", "asc", "", "");
  EXPECT_EQ(r.body["rows"][0]["rpy"], 1955);
  EXPECT_TRUE(r.body["rows"].back()["rpy"].is_null());
  EXPECT_EQ(svc.list_crs("title", "", "", "").status, 400);
  EXPECT_EQ(svc.list_crs("rpy", "sideways", "", "").status, 400);
  EXPECT_EQ(svc.list_crs("rpy", "", "-1", "").status, 400);
  EXPECT_EQ(svc.list_crs("rpy", "", "", "0").status, 400);
}

TEST_F(ServerTest, PagesAreDisjointAndCoverEverything) {
  testing::Rng rng(3);
  cre::WorkingState st = cre::fresh_state(testing::random_dataset(rng, 57, 20));
  CurationService svc(st, path_);
  for (const char* key : {"authors", "rpy", "n_cr"}) {
    std::vector<std::string> full;
    json all = svc.list_crs(key, "asc", "0", "1000").body;
    for (const auto& row : all["rows"]) full.push_back(row["id"]);
    std::vector<std::string> paged;
    for (int off = 0; off < 57; off += 10) {
      json page = svc.list_crs(key, "asc", std::to_string(off), "10").body;
      for (const auto& row : page["rows"]) {
        paged.push_back(row["id"]);
      }
    }
    EXPECT_EQ(paged, full) << key;
    EXPECT_EQ(full.size(), st.dataset.crs.size());
  }
}

TEST_F(ServerTest, DetailsEndpoint) {
  auto svc = CurationService::open(path_);
  CrId id = id_of(svc, "PRICE");
  ApiResponse r = svc.cr_details(id.str());
  ASSERT_EQ(r.status, 200);
  cre::WorkingState snap = svc.snapshot();
  const auto& cr = snap.dataset.crs.at(id);
  auto expected = display_details(cr);
  ASSERT_EQ(r.body["rows"].size(), expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    EXPECT_EQ(r.body["rows"][i]["label"], expected[i].label);
    EXPECT_EQ(r.body["rows"][i]["value"], expected[i].value);
  }
  EXPECT_EQ(svc.cr_details("c7777777").status, 404);
}

TEST_F(ServerTest, DecisionsAndClusters) {
  auto svc = CurationService::open(path_);
  CrId g = id_of(svc, "GARFIELD"), t = id_of(svc, "GARFELD"), p = id_of(svc, "PRICE");
  EXPECT_EQ(svc.post_decision("{\"a\":\"" + g.str() + "\",\"b\":\"" + g.str() +
                              "\",\"verdict\":\"SAME\"}").status, 400);
  EXPECT_EQ(svc.post_decision("not json").status, 400);
  EXPECT_EQ(svc.post_decision("{\"a\":\"" + g.str() + "\",\"b\":\"c9\",\"verdict\":\"SAME\"}").status,
            404);
  EXPECT_EQ(svc.post_decision("{\"a\":\"" + g.str() + "\",\"b\":\"" + p.str() +
                              "\",\"verdict\":\"MAYBE\"}").status, 400);
  EXPECT_FALSE(svc.dirty());

  ApiResponse r = svc.post_decision("{\"a\":\"" + t.str() + "\",\"b\":\"" + g.str() +
                                    "\",\"verdict\":\"SAME\"}");
  ASSERT_EQ(r.status, 200);
  ASSERT_EQ(r.body["clusters"].size(), 1u);
  EXPECT_EQ(r.body["clusters"][0]["size"], 2);
  EXPECT_EQ(r.body["clusters"][0]["pairs"][0]["provenance"], "MANUAL");
  EXPECT_TRUE(svc.dirty());

  auto clusters = svc.clusters("").body["clusters"];
  ASSERT_EQ(clusters.size(), 1u);
  EXPECT_EQ(svc.clusters("1").body["clusters"].size(), 5u);
  EXPECT_EQ(svc.clusters("zero").status, 400);

  r = svc.post_decision("{\"a\":\"" + t.str() + "\",\"b\":\"" + g.str() +
                        "\",\"verdict\":\"DIFFERENT\"}");
  EXPECT_EQ(r.body["clusters"].size(), 2u);
}

TEST_F(ServerTest, MergeConservesAndBlocksMergedAwayIds) {
  auto svc = CurationService::open(path_);
  CrId g = id_of(svc, "GARFIELD"), t = id_of(svc, "GARFELD"), p = id_of(svc, "PRICE");
  svc.post_decision("{\"a\":\"" + t.str() + "\",\"b\":\"" + g.str() + "\",\"verdict\":\"SAME\"}");
  auto before = svc.summary().body;
  ApiResponse m = svc.merge();
  ASSERT_EQ(m.status, 200);
  EXPECT_EQ(m.body["merged_clusters"], 1);
  auto after = svc.summary().body;
  EXPECT_EQ(after["total_n_cr"], before["total_n_cr"]);
  EXPECT_EQ(after["crs"], 5);
  CrId gone = svc.snapshot().dataset.find(g) ? t : g;
  EXPECT_EQ(svc.post_decision("{\"a\":\"" + gone.str() + "\",\"b\":\"" + p.str() +
                              "\",\"verdict\":\"SAME\"}").status, 409);
}

TEST_F(ServerTest, SpectrumTopAndRemove) {
  auto svc = CurationService::open(path_);
  auto rows = svc.rpys().body["rows"];
  EXPECT_EQ(rows.front()["rpy"], 1955);
  EXPECT_EQ(rows.back()["rpy"], 1999);
  EXPECT_EQ(rows.size(), 45u);
  EXPECT_EQ(svc.rpys().body["excluded_n_cr"], 1);
  auto top = svc.top("1955", "1").body["rows"];
  ASSERT_EQ(top.size(), 1u);
  EXPECT_EQ(top[0]["n_cr"], 2);
  EXPECT_EQ(svc.top("", "1").status, 400);

  EXPECT_EQ(svc.remove_rpy("{\"from\": 1960, \"to\": 1950}").status, 400);
  EXPECT_EQ(svc.remove_rpy("{\"from\": \"x\", \"to\": 1950}").status, 400);
  auto r = svc.remove_rpy("{\"from\": 1950, \"to\": 1970, \"keep_missing\": false}");
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body["removed_crs"], 5);
  EXPECT_EQ(svc.summary().body["crs"], 1);
}

TEST_F(ServerTest, SaveThenReloadEqualsLiveSession) {
  auto svc = CurationService::open(path_);
  CrId g = id_of(svc, "GARFIELD"), t = id_of(svc, "GARFELD"), p = id_of(svc, "PRICE");
  svc.post_decision("{\"a\":\"" + t.str() + "\",\"b\":\"" + g.str() + "\",\"verdict\":\"SAME\"}");
  svc.post_decision("{\"a\":\"" + p.str() + "\",\"b\":\"" + g.str() + "\",\"verdict\":\"DIFFERENT\"}");
  auto s = svc.save();
  ASSERT_EQ(s.status, 200);
  EXPECT_FALSE(svc.dirty());
  EXPECT_EQ(cre::load_cre_file(path_), svc.snapshot());

  svc.merge();
  svc.remove_rpy("{\"from\": 1990, \"to\": 2000}");
  svc.save();
  auto reloaded = CurationService::open(path_);
  EXPECT_EQ(reloaded.snapshot(), svc.snapshot());
  EXPECT_EQ(reloaded.list_crs("authors", "asc", "", "").body,
            svc.list_crs("authors", "asc", "", "").body);
}

TEST_F(ServerTest, HttpRoundTrip) {
  auto svc = CurationService::open(path_);
  httplib::Server http;
  svc.mount(http);
  int port = http.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread th([&] { http.listen_after_bind(); });
  http.wait_until_ready();

  httplib::Client client("127.0.0.1", port);
  auto res = client.Get("/api/summary");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(json::parse(res->body)["crs"], 6);
  res = client.Get("/api/crs/c0000003");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  res = client.Get("/api/crs/nope");
  EXPECT_EQ(res->status, 404);
  res = client.Post("/api/decisions", "{\"a\":\"c0000001\",\"b\":\"c0000001\",\"verdict\":\"SAME\"}",
                    "application/json");
  EXPECT_EQ(res->status, 400);
  res = client.Get("/api/crs?sort=authors&dir=asc&limit=2");
  ASSERT_TRUE(res);
  EXPECT_EQ(json::parse(res->body)["rows"].size(), 2u);
  res = client.Get("/");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  http.stop();
  th.join();
}

}  // namespace
}  // namespace crx::server
