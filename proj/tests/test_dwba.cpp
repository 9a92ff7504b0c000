#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "ponsim/dwba.hpp"

using namespace ponsim;

TEST_CASE("w_max derivation from guaranteed bandwidth") {
  CHECK(compute_w_max(8'000'000'000LL, micros(250)) == 250'000);
  CHECK(compute_w_max(4'445'000'000LL, micros(250)) == 138'906);  // floor of .25
  CHECK(compute_w_max(4'170'000'000LL, micros(250)) == 130'312);  // floor of .5
  CHECK_THROWS_AS(compute_w_max(0, micros(250)), InvalidSla);
  CHECK_THROWS_AS(compute_w_max(-5, micros(250)), InvalidSla);
  CHECK_THROWS_AS(compute_w_max(1'000'000'000LL, 0), InvalidSla);
}

TEST_CASE("grant sizing policies") {
  CHECK(size_grant_limited(1500, 1000) == 1000);
  CHECK(size_grant_limited(600, 1000) == 600);
  CHECK(size_grant_limited(0, 1000) == 0);
  CHECK(size_grant_gated(1500) == 1500);
  CHECK(size_grant_gated(0) == 0);
  CHECK(size_grant_fixed(1000) == 1000);
}

TEST_CASE("limited sizing never exceeds gated or the request") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::int64_t> dist(0, 300'000);
  for (int i = 0; i < 5000; ++i) {
    const auto req = dist(rng), cap = dist(rng);
    const auto lim = size_grant_limited(req, cap);
    CHECK(lim <= size_grant_gated(req));
    CHECK(lim <= req);
    CHECK(lim <= cap);
  }
}

TEST_CASE("prediction adds exactly the bursts inside the lookahead window") {
  ScriptedBurstSource wsi({{micros(30), 12'500}});

  SECTION("no burst in the interval returns the report unchanged") {
    ReportMsg r{0, 4000, micros(40)};
    CHECK(predict_request(r, OnuKind::Mfh, wsi, micros(60)) == 4000);
  }
  SECTION("one burst in the interval is added in full") {
    ReportMsg r{0, 0, micros(10)};
    CHECK(predict_request(r, OnuKind::Mfh, wsi, micros(60)) == 12'500);
  }
  SECTION("epsilon = -1 suppresses the increment entirely") {
    ReportMsg r{0, 700, micros(10)};
    CHECK(predict_request(r, OnuKind::Mfh, wsi, micros(60), -1.0) == 700);
  }
  SECTION("epsilon scales the increment") {
    ReportMsg r{0, 0, micros(10)};
    CHECK(predict_request(r, OnuKind::Mfh, wsi, micros(60), 0.1) == 13'750);
  }
  SECTION("degenerate window keeps the report") {
    ReportMsg r{0, 55, micros(40)};
    CHECK(predict_request(r, OnuKind::Mfh, wsi, micros(40)) == 55);
  }
  SECTION("conventional ONUs cannot be predicted") {
    ReportMsg r{0, 0, 0};
    CHECK_THROWS_AS(predict_request(r, OnuKind::Conventional, wsi, micros(60)),
                    PredictionUnavailable);
  }
}

namespace {
CustomerGroup two_member_group(std::int64_t prev, std::int64_t curr) {
  CustomerGroup g;
  g.customer_id = 1;
  g.member_onus = {0, 1};
  g.excess_prev = prev;
  g.excess_curr = curr;
  return g;
}
}  // namespace

TEST_CASE("online sharing grant decisions") {
  SECTION("underloaded member banks its slack") {
    auto g = two_member_group(0, 0);
    CHECK(proposed_grant(0, 600, 1000, g) == 600);
    CHECK(g.excess_curr == 400);
    CHECK(g.excess_prev == 0);
    CHECK(g.served_this_cycle == std::vector<OnuId>{0});
  }
  SECTION("overloaded member drains the previous pool first") {
    auto g = two_member_group(300, 100);
    CHECK(proposed_grant(1, 1500, 1000, g) == 1400);
    CHECK(g.excess_prev == 0);
    CHECK(g.excess_curr == 0);
  }
  SECTION("previous pool alone can cover the deficit") {
    auto g = two_member_group(600, 0);
    CHECK(proposed_grant(1, 1500, 1000, g) == 1500);
    CHECK(g.excess_prev == 100);
    CHECK(g.excess_curr == 0);
  }
  SECTION("with empty pools the decision equals limited sizing") {
    for (std::int64_t req : {0LL, 600LL, 1000LL, 1500LL, 90'000LL}) {
      auto g = two_member_group(0, 0);
      CHECK(proposed_grant(0, req, 1000, g) == size_grant_limited(req, 1000));
    }
  }
}

TEST_CASE("cycle rollover keeps one cycle of slack") {
  auto g = two_member_group(250, 70);
  g.served_this_cycle = g.member_onus;

  SECTION("current pool survives one boundary") {
    cycle_rollover(g);
    CHECK(g.excess_prev == 70);
    CHECK(g.excess_curr == 0);
    CHECK(g.served_this_cycle.empty());
    CHECK(g.cycle_index == 1);
  }
  SECTION("two idle boundaries discard everything") {
    cycle_rollover(g);
    g.served_this_cycle = g.member_onus;
    cycle_rollover(g);
    CHECK(g.excess_prev == 0);
    CHECK(g.excess_curr == 0);
    CHECK(g.cycle_index == 2);
  }
  SECTION("empty pools are a fixed point") {
    auto z = two_member_group(0, 0);
    z.served_this_cycle = z.member_onus;
    cycle_rollover(z);
    CHECK(z.excess_prev == 0);
    CHECK(z.excess_curr == 0);
  }
  SECTION("rollover before the boundary is a logic error") {
    auto late = two_member_group(0, 0);
    late.mark_served(0);
    CHECK_THROWS_AS(cycle_rollover(late), PrematureRollover);
  }
}

TEST_CASE("serving the same member twice does not close the cycle") {
  auto g = two_member_group(0, 0);
  proposed_grant(0, 100, 1000, g);
  proposed_grant(0, 2000, 1000, g);  // the member lapped its sibling
  CHECK_FALSE(g.cycle_complete());
  proposed_grant(1, 100, 1000, g);
  CHECK(g.cycle_complete());
}

TEST_CASE("sharing conservation holds across random request sequences") {
  // Per cycle: sum of grants <= sum of per-serve caps + pool carried in.
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::int64_t> req_dist(0, 2500);
  std::uniform_int_distribution<int> onu_dist(0, 2);
  constexpr std::int64_t kWmax = 1000;

  CustomerGroup g;
  g.member_onus = {0, 1, 2};

  std::int64_t grants_cycle = 0, caps_cycle = 0, prev_at_start = 0;
  for (int step = 0; step < 20'000; ++step) {
    const OnuId onu = onu_dist(rng);
    grants_cycle += proposed_grant(onu, req_dist(rng), kWmax, g);
    caps_cycle += kWmax;
    REQUIRE(g.excess_prev >= 0);
    REQUIRE(g.excess_curr >= 0);
    if (g.cycle_complete()) {
      REQUIRE(grants_cycle <= caps_cycle + prev_at_start);
      cycle_rollover(g);
      prev_at_start = g.excess_prev;
      grants_cycle = caps_cycle = 0;
    }
  }
}

TEST_CASE("underloaded members keep the saved pool equal to total slack") {
  CustomerGroup g;
  g.member_onus = {0, 1};
  for (int cycle = 0; cycle < 5; ++cycle) {
    proposed_grant(0, 700, 1000, g);  // slack 300
    proposed_grant(1, 900, 1000, g);  // slack 100
    REQUIRE(g.cycle_complete());
    cycle_rollover(g);
    CHECK(g.excess_prev == 400);
  }
}

TEST_CASE("batch sharing splits the pool in ascending id order") {
  SECTION("one underloaded funds one overloaded") {
    auto grants = mos_ipact_batch({{0, 600, 1000}, {1, 1500, 1000}});
    CHECK(grants == std::vector<std::int64_t>{600, 1400});
  }
  SECTION("all underloaded get exactly their requests") {
    auto grants = mos_ipact_batch({{0, 100, 1000}, {1, 0, 1000}, {2, 999, 1000}});
    CHECK(grants == std::vector<std::int64_t>{100, 0, 999});
  }
  SECTION("pool 300 against deficits 200 and 500") {
    auto grants = mos_ipact_batch({{0, 700, 1000}, {1, 1200, 1000}, {2, 1500, 1000}});
    CHECK(grants == std::vector<std::int64_t>{700, 1200, 1100});
  }
  SECTION("input order does not change the id-ordered shares") {
    auto grants = mos_ipact_batch({{2, 1500, 1000}, {0, 700, 1000}, {1, 1200, 1000}});
    CHECK(grants == std::vector<std::int64_t>{1100, 700, 1200});
  }
}

TEST_CASE("first-fit picks the earliest channel, ties to the lowest id") {
  std::vector<WavelengthChannel> chans{{0, 320, micros(100)}, {1, 320, micros(120)}};

  SECTION("waiting for the earliest horizon") {
    auto pick = first_fit_query(chans, micros(90));
    CHECK(pick.wavelength_id == 0);
    CHECK(pick.start_time == micros(100));
  }
  SECTION("tie on equal horizons goes to channel 0") {
    std::vector<WavelengthChannel> tie{{0, 320, micros(100)}, {1, 320, micros(100)}};
    CHECK(first_fit_query(tie, micros(10)).wavelength_id == 0);
  }
  SECTION("a late ONU start binds instead of the horizons") {
    auto pick = first_fit_query(chans, micros(130));
    CHECK(pick.wavelength_id == 0);
    CHECK(pick.start_time == micros(130));
  }
}

TEST_CASE("first-fit commit advances the horizon past burst, report, guard") {
  std::vector<WavelengthChannel> chans{{0, 320, 0}, {1, 320, 0}};
  auto pick = first_fit_assign(chans, 1000, micros(10), 624'000);
  CHECK(pick.wavelength_id == 0);
  CHECK(pick.start_time == micros(10));
  // 1064 B * 320 ps + 624000 ps past the start
  CHECK(chans[0].horizon == micros(10) + 340'480 + 624'000);
  CHECK(chans[1].horizon == 0);

  SECTION("query made before sizing equals the committed assignment") {
    auto q = first_fit_query(chans, micros(11));
    auto a = first_fit_assign(chans, 55'000, micros(11), 624'000);
    CHECK(q.wavelength_id == a.wavelength_id);
    CHECK(q.start_time == a.start_time);
  }
  SECTION("horizons never decrease over random assignment streams") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<std::int64_t> bytes(0, 250'000);
    std::uniform_int_distribution<SimTime> ahead(0, micros(300));
    SimTime clock = 0;
    std::vector<SimTime> last{chans[0].horizon, chans[1].horizon};
    for (int i = 0; i < 2000; ++i) {
      clock += ahead(rng);
      first_fit_assign(chans, bytes(rng), clock, 624'000);
      for (std::size_t c = 0; c < 2; ++c) {
        REQUIRE(chans[c].horizon >= last[c]);
        last[c] = chans[c].horizon;
      }
    }
  }
}

TEST_CASE("scheme presets carry the intended feature set") {
  for (auto kind : {SchemeKind::FirstFit, SchemeKind::FirstFitPred,
                    SchemeKind::MosIpact, SchemeKind::MosIpactPred,
                    SchemeKind::Proposed}) {
    auto cfg = SchemeConfig::preset(kind);
    CHECK_NOTHROW(cfg.validate());
    CHECK(scheme_from_string(to_string(kind)) == kind);
  }
  CHECK(SchemeConfig::preset(SchemeKind::Proposed).prediction_enabled);
  CHECK(SchemeConfig::preset(SchemeKind::Proposed).sharing_mode == SharingMode::Online);
  CHECK(SchemeConfig::preset(SchemeKind::FirstFit).sharing_mode == SharingMode::None);
  CHECK_FALSE(SchemeConfig::preset(SchemeKind::MosIpact).prediction_enabled);
  CHECK(SchemeConfig::preset(SchemeKind::MosIpactPred).sharing_mode ==
        SharingMode::Offline);

  SchemeConfig bad = SchemeConfig::preset(SchemeKind::Proposed);
  bad.prediction_enabled = false;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  SchemeConfig bad2 = SchemeConfig::preset(SchemeKind::FirstFit);
  bad2.sharing_mode = SharingMode::Online;
  CHECK_THROWS_AS(bad2.validate(), std::invalid_argument);
  CHECK_THROWS_AS(scheme_from_string("round-robin"), std::invalid_argument);
}
