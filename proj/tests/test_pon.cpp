#include <catch2/catch_amalgamated.hpp>

#include "ponsim/pon.hpp"

using namespace ponsim;

namespace {
Onu make_onu(std::int64_t distance_m = 0) {
  return Onu{0, OnuKind::Mfh, 0, distance_m, 8'000'000'000LL};
}
}  // namespace

TEST_CASE("enqueue accumulates backlog in FIFO order") {
  auto onu = make_onu();
  CHECK(onu.backlog_bytes() == 0);

  onu.enqueue(Frame{1518, 100});
  CHECK(onu.backlog_bytes() == 1518);

  SECTION("same-tick arrivals keep insertion order") {
    onu.enqueue(Frame{64, 200});
    onu.enqueue(Frame{594, 200});
    REQUIRE(onu.queue_depth() == 3);
    CHECK(onu.queue()[1].size_bytes == 64);
    CHECK(onu.queue()[2].size_bytes == 594);
  }
  SECTION("many minimum-size frames") {
    for (int i = 0; i < 10'000; ++i) onu.enqueue(Frame{64, 200 + i});
    CHECK(onu.backlog_bytes() == 1518 + 640'000);
  }
  SECTION("arrival order violations are rejected") {
    CHECK_THROWS_AS(onu.enqueue(Frame{64, 99}), std::logic_error);
  }
}

TEST_CASE("report reflects the backlog at generation time") {
  auto onu = make_onu();
  CHECK(onu.generate_report(5).queue_bytes == 0);
  onu.enqueue(Frame{1500, 1});
  onu.enqueue(Frame{3000, 2});  // oversize frames never exist; drain math only
  auto r = onu.generate_report(10);
  CHECK(r.queue_bytes == 4500);
  CHECK(r.gen_time == 10);
  CHECK(r.onu_id == 0);
}

TEST_CASE("report slot costs 20480 ps on a 25G channel") {
  CHECK(tx_time(kReportSlotBytes, 320) == 20'480);
}

TEST_CASE("grant execution drains whole frames and stamps OLT completions") {
  SECTION("single frame, zero distance") {
    auto onu = make_onu(0);
    onu.enqueue(Frame{1000, 0});
    auto sent = execute_grant(onu, GateMsg{0, 0, 1'000'000, 1000, 0}, 320);
    REQUIRE(sent.size() == 1);
    CHECK(sent[0].completion_time_at_olt == 1'000'000 + 320'000);
    CHECK(onu.backlog_bytes() == 0);
  }
  SECTION("no fragmentation: second frame must fully fit") {
    auto onu = make_onu();
    onu.enqueue(Frame{800, 0});
    onu.enqueue(Frame{800, 0});
    auto sent = execute_grant(onu, GateMsg{0, 0, 0, 1000, 0}, 320);
    REQUIRE(sent.size() == 1);
    CHECK(onu.backlog_bytes() == 800);
  }
  SECTION("zero-byte grant sends nothing but the poll stays alive") {
    auto onu = make_onu();
    onu.enqueue(Frame{64, 0});
    auto sent = execute_grant(onu, GateMsg{0, 0, 0, 0, 0}, 320);
    CHECK(sent.empty());
    CHECK(onu.generate_report(77).queue_bytes == 64);
  }
  SECTION("cursor accumulates across frames and adds propagation") {
    auto onu = make_onu(1000);  // 1 km -> 5 us one way
    onu.enqueue(Frame{1000, 0});
    onu.enqueue(Frame{500, 0});
    auto sent = execute_grant(onu, GateMsg{0, 0, 0, 1500, 0}, 320);
    REQUIRE(sent.size() == 2);
    CHECK(sent[0].completion_time_at_olt == 320'000 + 5'000'000);
    CHECK(sent[1].completion_time_at_olt == 480'000 + 5'000'000);
  }
}

TEST_CASE("frame delay lower bound holds for drained frames") {
  auto onu = make_onu(2000);
  onu.enqueue(Frame{1518, 400});
  auto sent = execute_grant(onu, GateMsg{0, 0, 500, 1518, 0}, 320);
  REQUIRE(sent.size() == 1);
  const SimTime delay = sent[0].completion_time_at_olt - sent[0].frame.arrival_time;
  CHECK(delay >= tx_time(1518, 320) + onu.prop_delay());
}

TEST_CASE("occupancy checker accepts guard-separated bursts only") {
  ChannelOccupancyChecker checker(2, 624'000);
  checker.record(0, 0, 100'000);
  SECTION("start exactly at the guard boundary is legal") {
    CHECK_NOTHROW(checker.record(0, 724'000, 800'000));
  }
  SECTION("start inside the guard window is an overlap") {
    CHECK_THROWS_AS(checker.record(0, 723'999, 800'000), OverlapDetected);
  }
  SECTION("channels are independent") {
    CHECK_NOTHROW(checker.record(1, 50'000, 60'000));
  }
  SECTION("unknown wavelength is rejected") {
    CHECK_THROWS_AS(checker.record(7, 0, 1), std::out_of_range);
  }
}
