#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "kdi/error.hpp"
#include "kdi/explain.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace kdi;

namespace {

SaliencyMap map_from(std::size_t h, std::size_t w, const std::vector<double>& v) {
  return normalize_saliency(Tensor({h, w}, v), 0);
}

}  // namespace

TEST_CASE("gradcam_map hand cases") {
  const Tensor a({1, 2, 2}, {1, 2, 3, 4});
  const Tensor up = gradcam_map(a, Tensor({1, 2, 2}, 1.0));
  CHECK(up.shape() == Shape{2, 2});
  for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(up[i] - a[i]) <= 1e-12);
  const Tensor down = gradcam_map(a, Tensor({1, 2, 2}, -1.0));
  for (double v : down.values()) CHECK(v == 0.0);

  // Two channels: alpha = (0.5, -0.25).
  const Tensor a2({2, 1, 2}, {2, 4, 8, 1});
  const Tensor g2({2, 1, 2}, {0.25, 0.75, -0.5, 0.0});
  const Tensor m = gradcam_map(a2, g2);
  CHECK(std::abs(m[0] - std::max(0.0, 0.5 * 2 - 0.25 * 8)) <= 1e-12);
  CHECK(std::abs(m[1] - std::max(0.0, 0.5 * 4 - 0.25 * 1)) <= 1e-12);
  CHECK_THROWS_AS(gradcam_map(a, Tensor({1, 2, 3})), ValidationError);
}

TEST_CASE("gradcam on the single-channel hand network") {
  const std::vector<double> x{1, 2, 3, 4};
  const std::vector<double> ones(4, 1.0), minus(4, -1.0);
  auto hand = test::hand_cnn(2, 2, 1.0, 0.0, ones, minus, x);
  NetworkTrace trace;
  hand.net.forward(std::vector<Tensor>{hand.input}, &trace);
  const Tensor pos = gradcam(hand.net, trace, 0);
  const Tensor neg = gradcam(hand.net, trace, 1);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(std::abs(pos[i] - x[i]) <= 1e-12);
    CHECK(neg[i] == 0.0);
  }

  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0), pos_u(0.1, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t h = 1 + rng() % 4, w = 1 + rng() % 5;
    std::vector<double> in(h * w), f0(h * w), f1(h * w);
    for (auto& v : in) v = pos_u(rng);
    for (auto& v : f0) v = u(rng);
    for (auto& v : f1) v = u(rng);
    const double cw = pos_u(rng), cb = 0.5 * pos_u(rng);
    auto net = test::hand_cnn(h, w, cw, cb, f0, f1, in);
    NetworkTrace tr;
    net.net.forward(std::vector<Tensor>{net.input}, &tr);
    const auto e0 = test::hand_gradcam(cw, cb, f0, in);
    const auto e1 = test::hand_gradcam(cw, cb, f1, in);
    const Tensor g0 = gradcam(net.net, tr, 0), g1 = gradcam(net.net, tr, 1);
    for (std::size_t i = 0; i < h * w; ++i) {
      CHECK(std::abs(g0[i] - e0[i]) <= 1e-12);
      CHECK(std::abs(g1[i] - e1[i]) <= 1e-12);
    }
  }
}

TEST_CASE("class sensitivity on the hand network") {
  const std::vector<double> x{1, 2, 3, 4};
  auto hand = test::hand_cnn(2, 2, 1.0, 0.0, {1, 1, 1, 1}, {2, 2, 2, 2}, x);
  NetworkTrace trace;
  hand.net.forward(std::vector<Tensor>{hand.input}, &trace);
  CHECK_FALSE(gradcam(hand.net, trace, 0) == gradcam(hand.net, trace, 1));
}

TEST_CASE("zero final activations give a flagged all-zero map") {
  auto hand = test::hand_cnn(2, 3, 0.0, 0.0, std::vector<double>(6, 1.0), std::vector<double>(6, -1.0),
                             {1, 2, 3, 4, 5, 6});
  Sample s;
  s.frames = {hand.input};
  const Explanation ex = explain_sample(hand.net, s);
  CHECK(ex.saliency.all_zero);
  for (double v : ex.saliency.values.values()) CHECK(v == 0.0);
  CHECK_FALSE(ex.dominant.has_value());
}

TEST_CASE("upsample_time") {
  const Tensor row({1, 2}, {0.0, 1.0});
  const Tensor up = upsample_time(row, 4);
  CHECK(up.shape() == Shape{1, 4});
  CHECK(std::abs(up[0] - 0.0) <= 1e-15);
  CHECK(std::abs(up[1] - 1.0 / 3.0) <= 1e-15);
  CHECK(std::abs(up[2] - 2.0 / 3.0) <= 1e-15);
  CHECK(std::abs(up[3] - 1.0) <= 1e-15);

  std::mt19937_64 rng(5);
  const Tensor m = test::random_tensor({9, 10}, rng, 0, 1);
  CHECK(upsample_time(m, 10) == m);
  const Tensor one({2, 1}, {0.3, 0.7});
  const Tensor b = upsample_time(one, 5);
  for (std::size_t x = 0; x < 5; ++x) {
    CHECK(b[x] == 0.3);
    CHECK(b[5 + x] == 0.7);
  }
  // Row maximum preserved when it sits at an endpoint.
  Tensor coarse = test::random_tensor({9, 4}, rng, 0, 0.5);
  for (std::size_t r = 0; r < 9; ++r) coarse[r * 4 + (r % 2 ? 3 : 0)] = 0.9;
  const Tensor wide = upsample_time(coarse, 10);
  for (std::size_t r = 0; r < 9; ++r) {
    double mx = 0;
    for (std::size_t x = 0; x < 10; ++x) mx = std::max(mx, wide[r * 10 + x]);
    CHECK(std::abs(mx - 0.9) <= 1e-12);
  }
  const Tensor near = upsample_time(row, 4, Interpolation::kNearest);
  CHECK(near == Tensor({1, 4}, {0, 0, 1, 1}));
  CHECK(parse_interpolation("nearest") == Interpolation::kNearest);
  CHECK_THROWS_AS(parse_interpolation("cubic"), ValidationError);
}

TEST_CASE("normalize_saliency") {
  const SaliencyMap m = map_from(1, 3, {0.5, 2.0, 1.0});
  CHECK_FALSE(m.all_zero);
  CHECK(m.values == Tensor({1, 3}, {0.25, 1.0, 0.5}));
  CHECK(map_from(1, 2, {0.0, 0.0}).all_zero);
}

TEST_CASE("gradcam_clstm matches the scalar oracle") {
  CHECK(test::clstm_gradcam_oracle_error(17) <= 1e-10);
}

TEST_CASE("gradcam_clstm averaging rule") {
  // Hidden state constant over steps (input ignored, f = 0).
  test::ScalarLstmNet n;
  n.in = 1;
  n.hid = 1;
  n.h = 2;
  n.w = 3;
  n.k = 1;
  n.pad = 0;
  n.wg = {0.0, 0.0};
  n.bias = {0.3, -50.0, 0.2, 0.7};  // f saturates to 0: c_t = i g every step
  n.fc = {1, 2, 3, 4, 5, 6, -1, -1, -1, -1, -1, -1};
  n.fc_bias = {0, 0};
  const EventNet net = test::library_lstm(n);
  std::vector<Tensor> frames(3, Tensor({1, 2, 3}, 0.5));
  NetworkTrace trace;
  net.forward(frames, &trace);
  CHECK(trace.top_hidden[0] == trace.top_hidden[2]);
  const SaliencyMap s = gradcam_clstm(net, trace, 0);
  // Only the final step receives gradient, so the average is a third of its
  // map and normalization removes the factor.
  CHECK_FALSE(s.all_zero);
  for (double v : s.values.values()) CHECK(std::abs(v - 1.0) <= 1e-12);
  CHECK(gradcam_clstm(net, trace, 1).all_zero);
}

TEST_CASE("dominant_feature") {
  std::vector<double> v(9 * 4, 0.0);
  v[4 * 4 + 1] = 0.7;
  v[4 * 4 + 2] = 1.0;
  CHECK(dominant_feature(map_from(9, 4, v)) == std::optional<std::size_t>(4));
  CHECK_FALSE(dominant_feature(map_from(9, 4, std::vector<double>(36, 0.0))).has_value());
  std::vector<double> tie(36, 0.0);
  tie[2 * 4] = 1.0;
  tie[5 * 4 + 3] = 1.0;
  CHECK(dominant_feature(map_from(9, 4, tie)) == std::optional<std::size_t>(2));
  // Threshold mode: many small cells in row 1 lose to one strong cell in row 6.
  std::vector<double> th(36, 0.0);
  for (int x = 0; x < 4; ++x) th[1 * 4 + x] = 0.4;
  th[6 * 4] = 1.0;
  CHECK(dominant_feature(map_from(9, 4, th)) == std::optional<std::size_t>(1));
  CHECK(dominant_feature(map_from(9, 4, th), 0.5) == std::optional<std::size_t>(6));
}

TEST_CASE("row-attribution soundness") {
  // Holds with zero conv biases: otherwise every row carries a constant
  // bias-driven activation that alpha weighs like any other.
  std::mt19937_64 rng(8);
  EventNetConfig cfg;
  cfg.init_seed = 21;
  std::size_t leaks_with_bias = 0;
  for (bool zero_bias : {true, false}) {
    for (std::size_t row = 0; row < kFeatureRows; ++row) {
      EventNet net(cfg);
      if (zero_bias) {
        for (auto& conv : net.convs()) conv.bias.fill(0.0);
      }
      Tensor& w = net.fc().weight;
      const std::size_t per_class = 128 * 9 * 4;
      for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t k = 0; k < 128; ++k)
          for (std::size_t y = 0; y < 9; ++y)
            for (std::size_t x = 0; x < 4; ++x)
              if (y != row) w[c * per_class + (k * 9 + y) * 4 + x] = 0.0;
      Tensor in({3, 9, 10});
      for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t x = 0; x < 10; ++x) in.at(c, row, x) = std::uniform_real_distribution<double>(0.1, 1)(rng);
      Sample s;
      s.frames = {in};
      const Explanation ex = explain_sample(net, s);
      CHECK(ex.saliency.target_class == ex.prediction.predicted);
      const Tensor& v = ex.saliency.values;
      for (std::size_t y = 0; y < 9; ++y) {
        for (std::size_t x = 0; x < 10; ++x) {
          if (y == row) continue;
          if (zero_bias) {
            CHECK(v[y * 10 + x] == 0.0);
          } else {
            leaks_with_bias += v[y * 10 + x] != 0.0;
          }
        }
      }
    }
  }
  CHECK(leaks_with_bias > 0);
}

TEST_CASE("utilization report") {
  test::PlantedOptions po;
  po.trials = 4;
  po.blocks_per_trial = 40;
  po.row = 5;
  const LabeledDataset ds = test::planted_dataset(po);
  const auto train_set = make_samples(ds, SplitRole::kTrain, 1, ColormapKind::kSequential);
  const auto test_set = make_samples(ds, SplitRole::kTest, 1, ColormapKind::kSequential);
  EventNetConfig cfg;
  cfg.init_seed = 3;
  EventNet net(cfg);
  TrainConfig tc = train_preset("C1");
  tc.epochs = 8;
  tc.seed = 1;
  train(net, train_set, tc);

  std::vector<Explanation> all;
  for (const auto& s : test_set) all.push_back(explain_sample(net, s));
  const UtilizationReport rep = utilization_report(all);
  const Metrics m = evaluate(net, test_set);
  const long long expect[4] = {m.counts.tp, m.counts.tn, m.counts.fp, m.counts.fn};
  for (std::size_t o = 0; o < 4; ++o) {
    CHECK(rep.totals[o] + rep.all_zero[o] == expect[o]);
    long long sum = 0;
    double pct = 0.0;
    for (std::size_t f = 0; f < kFeatureRows; ++f) {
      sum += rep.counts[o][f];
      pct += rep.percent(static_cast<Outcome>(o), f);
    }
    CHECK(sum == rep.totals[o]);
    if (rep.totals[o] > 0) CHECK(std::abs(pct - 100.0) <= 1e-9);
  }
  CHECK(m.accuracy == 1.0);
  CHECK(rep.counts[0][5] == rep.totals[0]);
  CHECK(rep.counts[1][5] == rep.totals[1]);

  const UtilizationReport via_net = utilization_report(net, test_set);
  CHECK(via_net.csv() == rep.csv());

  const UtilizationReport one = utilization_report(std::span(all).first(1));
  int cells_at_100 = 0;
  for (std::size_t o = 0; o < 4; ++o)
    for (std::size_t f = 0; f < kFeatureRows; ++f) cells_at_100 += one.percent(static_cast<Outcome>(o), f) == 100.0;
  CHECK(cells_at_100 == 1);

  const std::string csv = rep.csv();
  CHECK(csv.rfind("feature,TP_pct,TN_pct,FP_pct,FN_pct,TP_count,TN_count,FP_count,FN_count\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 12);
  CHECK_THROWS_AS(utilization_report(std::vector<Explanation>{}), ValidationError);
}

TEST_CASE("render_overlay") {
  Image img(3, 9, 10, 0.25);
  const Image blank = render_overlay(img, map_from(9, 10, std::vector<double>(90, 0.0)));
  CHECK(blank.width() == 21);
  CHECK(blank.height() == 9);
  for (std::size_t y = 0; y < 9; ++y) {
    for (std::size_t c = 0; c < 3; ++c) {
      CHECK(blank.at(c, y, 10) == 1.0);
      for (std::size_t x = 0; x < 10; ++x) {
        CHECK(blank.at(c, y, x) == 0.25);
        CHECK(blank.at(c, y, 11 + x) == 0.0);
      }
    }
  }
  std::vector<double> one(90, 0.0);
  one[3 * 10 + 7] = 1.0;
  const Image hot = render_overlay(img, map_from(9, 10, one));
  int red = 0;
  for (std::size_t y = 0; y < 9; ++y)
    for (std::size_t x = 11; x < 21; ++x)
      red += hot.at(0, y, x) == 1.0 && hot.at(1, y, x) == 0.0 && hot.at(2, y, x) == 0.0;
  CHECK(red == 1);
  CHECK(hot.at(0, 3, 18) == 1.0);
  CHECK_THROWS_AS(render_overlay(img, map_from(9, 4, std::vector<double>(36, 0.0))), ValidationError);
  CHECK(overlay_filename("push_003", 41) == "push_003_41_overlay.ppm");
}
