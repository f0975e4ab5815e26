#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "fedsim/netsim.hpp"
#include "fedsim/rng.hpp"

using namespace fedsim;

TEST_CASE("zero bytes cost exactly the base latency") {
    LinkModel link;
    link.base_latency_s = 0.07;
    CHECK(transmit_time(0, link, Direction::kUplink) == 0.07);
    CHECK(transmit_time(0, link, Direction::kDownlink) == 0.07);
}

TEST_CASE("latency plus bytes over bandwidth") {
    LinkModel link;
    link.uplink_bps = 750000.0;
    link.base_latency_s = 0.05;
    CHECK(transmit_time(750000, link, Direction::kUplink) ==
          doctest::Approx(1.05).epsilon(1e-15));
}

TEST_CASE("doubling bandwidth halves the transfer term") {
    LinkModel link;
    link.uplink_bps = 1e6;
    link.base_latency_s = 0.0;
    const double t1 = transmit_time(123456, link, Direction::kUplink);
    link.uplink_bps = 2e6;
    const double t2 = transmit_time(123456, link, Direction::kUplink);
    CHECK(t1 == doctest::Approx(2.0 * t2).epsilon(1e-15));
}

TEST_CASE("directions use their own bandwidth") {
    LinkModel link;
    link.uplink_bps = 1000.0;
    link.downlink_bps = 4000.0;
    link.base_latency_s = 0.0;
    CHECK(transmit_time(4000, link, Direction::kUplink) == doctest::Approx(4.0));
    CHECK(transmit_time(4000, link, Direction::kDownlink) == doctest::Approx(1.0));
}

TEST_CASE("invalid link parameters are rejected") {
    LinkModel bad;
    bad.uplink_bps = 0.0;
    CHECK_THROWS((void)transmit_time(10, bad, Direction::kUplink));
    LinkModel neg;
    neg.base_latency_s = -1.0;
    CHECK_THROWS((void)transmit_time(10, neg, Direction::kUplink));
}

TEST_CASE("availability extremes are exact") {
    AvailabilityModel always;
    always.p_available = 1.0;
    AvailabilityModel never;
    never.p_available = 0.0;
    for (std::size_t client = 0; client < 20; ++client) {
        for (std::uint64_t round = 0; round < 20; ++round) {
            CHECK(sample_available(client, round, always, 7));
            CHECK_FALSE(sample_available(client, round, never, 7));
        }
    }
}

TEST_CASE("availability is deterministic per (client, round) and near its rate") {
    AvailabilityModel half;
    half.p_available = 0.5;
    std::size_t hits = 0;
    const std::size_t clients = 100, rounds = 100;
    for (std::size_t c = 0; c < clients; ++c)
        for (std::uint64_t r = 0; r < rounds; ++r) {
            const bool a = sample_available(c, r, half, 99);
            CHECK(a == sample_available(c, r, half, 99));
            hits += a ? 1 : 0;
        }
    const double rate = static_cast<double>(hits) / static_cast<double>(clients * rounds);
    CHECK(rate >= 0.48);
    CHECK(rate <= 0.52);
}

TEST_CASE("availability probability bounds are validated") {
    AvailabilityModel bad;
    bad.p_available = 1.5;
    CHECK_THROWS((void)sample_available(0, 0, bad, 1));
    bad.p_available = -0.1;
    CHECK_THROWS((void)sample_available(0, 0, bad, 1));
}

TEST_CASE("events pop in time order") {
    EventQueue q;
    q.push(3.0, EventKind::kTrainDone, 0);
    q.push(1.0, EventKind::kTrainDone, 1);
    q.push(2.0, EventKind::kTrainDone, 2);
    CHECK(q.size() == 3);
    CHECK(q.pop()->time == 1.0);
    CHECK(q.pop()->time == 2.0);
    CHECK(q.pop()->time == 3.0);
    CHECK(!q.pop().has_value());
    CHECK(q.empty());
}

TEST_CASE("equal times break ties by insertion sequence") {
    EventQueue q;
    q.push(4.0, EventKind::kUploadArrive, 10);  // seq 0
    q.push(5.0, EventKind::kUploadArrive, 11);  // seq 1
    q.push(5.0, EventKind::kUploadArrive, 12);  // seq 2
    q.push(4.0, EventKind::kUploadArrive, 13);  // seq 3

    const auto a = q.pop();
    const auto b = q.pop();
    CHECK(a->client_id == 10);
    CHECK(b->client_id == 13);
    const auto c = q.pop();
    const auto d = q.pop();
    CHECK(c->client_id == 11);
    CHECK(d->client_id == 12);
}

TEST_CASE("ten thousand random events replay the sort oracle") {
    struct Row {
        double time;
        std::uint64_t seq;
        std::size_t client;
    };
    EventQueue q;
    std::vector<Row> oracle;
    Rng rng(55);
    const std::size_t n = 100000;
    for (std::size_t i = 0; i < n; ++i) {
        // Coarse times force plenty of ties.
        const double t = std::floor(rng.uniform(0.0, 100.0) * 4.0) / 4.0;
        q.push(t, EventKind::kTrainDone, i);
        oracle.push_back({t, i, i});
    }
    std::stable_sort(oracle.begin(), oracle.end(),
                     [](const Row& a, const Row& b) { return a.time < b.time; });

    double last = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto e = q.pop();
        REQUIRE(e.has_value());
        CHECK(e->time == oracle[i].time);
        CHECK(e->client_id == oracle[i].client);
        CHECK(e->time >= last);  // non-decreasing processed sequence
        last = e->time;
    }
    CHECK(q.empty());
}

TEST_CASE("invalid event times are rejected") {
    EventQueue q;
    CHECK_THROWS(q.push(-1.0, EventKind::kTrainDone, 0));
    CHECK_THROWS(q.push(std::nan(""), EventKind::kTrainDone, 0));
    CHECK_THROWS(q.push(INFINITY, EventKind::kTrainDone, 0));
}

TEST_CASE("event payloads ride along") {
    EventQueue q;
    q.push(1.0, EventKind::kDownloadArrive, 3, 0xABCD);
    const auto e = q.pop();
    CHECK(e->kind == EventKind::kDownloadArrive);
    CHECK(e->payload == 0xABCD);
}
