#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "daosim/metrics.hpp"

using namespace daosim;

TEST_CASE("pdr is delivered over sent, absent with no traffic") {
  RunMetrics m;
  CHECK_FALSE(pdr(m).has_value());
  m.data_sent = 100;
  m.data_delivered = 100;
  CHECK(pdr(m) == 1.0);
  m.data_delivered = 0;
  CHECK(pdr(m) == 0.0);
  m.data_sent = 200;
  m.data_delivered = 143;
  CHECK(pdr(m) == doctest::Approx(0.715).epsilon(1e-12));
  // integer consistency
  CHECK(*pdr(m) * static_cast<double>(m.data_sent) ==
        doctest::Approx(143.0).epsilon(1e-12));
}

TEST_CASE("pdr can pool downward traffic on request") {
  RunMetrics m;
  m.data_sent = 10;
  m.data_delivered = 10;
  m.down_sent = 10;
  m.down_delivered = 0;
  CHECK(pdr(m) == 1.0);
  CHECK(pdr(m, true) == 0.5);
}

TEST_CASE("ae2ed is the mean of delivered latencies") {
  RunMetrics m;
  CHECK_FALSE(ae2ed_ms(m).has_value());
  m.latencies_us = {10000};
  CHECK(ae2ed_ms(m) == 10.0);
  m.latencies_us = {10000, 20000, 30000};
  CHECK(ae2ed_ms(m) == 20.0);
}

TEST_CASE("throughput is delivered bits over the run duration") {
  RunMetrics m;
  CHECK(throughput_bps(m) == 0.0);
  m.duration_us = 100 * us_per_s;
  CHECK(throughput_bps(m) == 0.0);
  m.data_bits_delivered = 1000 * 256;
  CHECK(throughput_bps(m) == doctest::Approx(2560.0).epsilon(1e-12));
}

TEST_CASE("summarize: constant samples have zero width") {
  SummaryStats s = summarize({5, 5, 5, 5});
  CHECK(s.mean == 5.0);
  CHECK(s.half_width_95 == 0.0);
  CHECK(s.n == 4);
}

TEST_CASE("summarize matches the textbook t-interval") {
  SummaryStats s = summarize({1, 2, 3, 4, 5});
  CHECK(s.mean == 3.0);
  // s = sqrt(2.5), t(0.975, 4) = 2.776445
  double expect = 2.776445 * std::sqrt(2.5) / std::sqrt(5.0);
  CHECK(*s.half_width_95 == doctest::Approx(expect).epsilon(1e-9));
  CHECK(*s.half_width_95 == doctest::Approx(1.963).epsilon(1e-3));
}

TEST_CASE("ten samples use the nine-degree t quantile") {
  CHECK(student_t_975(9) == doctest::Approx(2.262157).epsilon(1e-6));
  std::vector<double> xs = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  SummaryStats s = summarize(xs);
  CHECK(s.mean == 5.5);
  double sd = std::sqrt(82.5 / 9.0);
  CHECK(*s.half_width_95 ==
        doctest::Approx(2.262157 * sd / std::sqrt(10.0)).epsilon(1e-9));
}

TEST_CASE("summarize needs two samples for an interval") {
  SummaryStats s = summarize({42});
  CHECK(s.mean == 42.0);
  CHECK_FALSE(s.half_width_95.has_value());
  CHECK(summarize({}).n == 0);
}

TEST_CASE("summarize is permutation invariant") {
  std::vector<double> xs = {3.5, 1.25, -2, 8.75, 0.5, 12.125, 7, 4.5};
  SummaryStats base = summarize(xs);
  Rng rng(17);
  for (int i = 0; i < 100; ++i) {
    for (std::size_t k = xs.size(); k > 1; --k)
      std::swap(xs[k - 1], xs[rand_below(rng, k)]);
    SummaryStats s = summarize(xs);
    CHECK(s.mean == doctest::Approx(base.mean).epsilon(1e-12));
    CHECK(*s.half_width_95 ==
          doctest::Approx(*base.half_width_95).epsilon(1e-12));
  }
}

TEST_CASE("control overhead returns the per-type counters") {
  RunMetrics m;
  m.control_tx[MsgKind::Dio] = 10;
  m.control_tx[MsgKind::Dao] = 34;
  auto c = control_overhead(m);
  CHECK(c.at(MsgKind::Dao) == 34);
  CHECK(control_tx_of(m, MsgKind::Dis) == 0);
}
