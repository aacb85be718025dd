// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "kinesim/dynamics.hpp"
#include "kinesim/kinematics.hpp"
#include "kinesim/linalg.hpp"
#include "kinesim/live_server.hpp"
#include "kinesim/pedestrians.hpp"
#include "kinesim/serialization.hpp"
#include "live_client.hpp"
#include "test_support.hpp"

using namespace kinesim;
using kinesim::testing::random_config;
using kinesim::testing::random_vec;
using kinesim::testing::random_vec3;
using std::chrono::milliseconds;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass{true};
  std::string detail;
};

// Collects failed expectations; the first few end up in the detail text.
struct Ledger {
  int failures{0};
  std::vector<std::string> notes;
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    if (++failures <= 3) notes.push_back(what);
  }
  Outcome outcome(std::string summary) const {
    for (const auto& n : notes) summary += "; " + n;
    return {failures == 0, summary};
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// ---------------------------------------------------------------- kinematics

Outcome kinematics_oracles() {
  Ledger l;
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);

  const RobotModel planar = create_planar_2r();
  const double a1 = planar.links()[0].a, a2 = planar.links()[1].a;
  double worst_fk = 0;
  for (int i = 0; i < 1000; ++i) {
    const VecX q = random_config(planar, rng);
    const Vec3 closed(a1 * std::cos(q(0)) + a2 * std::cos(q(0) + q(1)),
                      a1 * std::sin(q(0)) + a2 * std::sin(q(0) + q(1)), 0.0);
    worst_fk = std::max(worst_fk, (fkm(planar, q).block<3, 1>(0, 3) - closed).cwiseAbs().maxCoeff());
  }
  l.expect(worst_fk <= 1e-12, "planar FK error " + num(worst_fk));

  // Finite differences of fkm: position rows directly, angular rows from
  // the skew part of Rdot R^T.
  const RobotModel arm = create_generic_6r();
  const double h = 1e-6;
  double worst_jac = 0;
  for (int i = 0; i < 200; ++i) {
    const VecX q = random_config(arm, rng);
    const Mat j = jac_geo(arm, q).jac;
    const Mat3 r = fkm(arm, q).block<3, 3>(0, 0);
    for (Eigen::Index c = 0; c < q.size(); ++c) {
      VecX qp = q, qm = q;
      qp(c) += h;
      qm(c) -= h;
      const Htm hp = fkm(arm, qp), hm = fkm(arm, qm);
      const Vec3 dp = (hp.block<3, 1>(0, 3) - hm.block<3, 1>(0, 3)) / (2 * h);
      const Mat3 rdot = (hp.block<3, 3>(0, 0) - hm.block<3, 3>(0, 0)) / (2 * h);
      const Vec3 w = testing::vee(rdot * r.transpose());
      worst_jac = std::max(worst_jac, (j.block<3, 1>(0, c) - dp).cwiseAbs().maxCoeff());
      worst_jac = std::max(worst_jac, (j.block<3, 1>(3, c) - w).cwiseAbs().maxCoeff());
    }
  }
  l.expect(worst_jac <= 1e-5, "jacobian error " + num(worst_jac));
  const double elapsed = seconds_since(t0);
  l.expect(elapsed < 10.0, "runtime " + num(elapsed) + " s");
  return l.outcome("fk max err " + num(worst_fk) + " m, jacobian max err " + num(worst_jac) + ", " +
                   num(elapsed) + " s");
}

// ---------------------------------------------------------------- ik

Outcome ik_success() {
  Ledger l;
  const RobotModel arm = create_generic_6r();
  std::mt19937_64 rng(7);
  IkParams params;
  params.seed = 7;
  int solved = 0;
  double slowest = 0;
  for (int i = 0; i < 100; ++i) {
    const Htm target = fkm(arm, random_config(arm, rng));
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const VecX q = ikm(arm, target, arm.q(), params).q;
      const double took = seconds_since(t0);
      slowest = std::max(slowest, took);
      l.expect(took < 1.0, "solve " + std::to_string(i) + " took " + num(took) + " s");
      l.expect(arm.within_limits(q), "solve " + std::to_string(i) + " left the joint limits");
      // Independent residual: translation distance and rotation angle.
      const Htm got = fkm(arm, q);
      const double pos = (got.block<3, 1>(0, 3) - target.block<3, 1>(0, 3)).norm();
      const Mat3 rel = target.block<3, 3>(0, 0).transpose() * got.block<3, 3>(0, 0);
      const double ang = std::acos(std::clamp((rel.trace() - 1.0) / 2.0, -1.0, 1.0));
      if (pos < 1e-4 && ang < 1e-3) ++solved;
    } catch (const IkFailure& e) {
      slowest = std::max(slowest, seconds_since(t0));
      l.expect(arm.within_limits(e.best_q()), "failed solve " + std::to_string(i) + " left the joint limits");
    }
  }
  l.expect(solved >= 95, "solved " + std::to_string(solved) + " of 100");
  return l.outcome(std::to_string(solved) + "/100 solved, slowest " + num(slowest) + " s");
}

// ---------------------------------------------------------------- linalg

Outcome linalg_properties() {
  Ledger l;
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(3);

  double worst_inv = 0;
  for (int i = 0; i < 1000; ++i) {
    const Htm h = htm_rand(rng, 1.0, true);
    worst_inv = std::max(worst_inv, (h * inv_htm(h) - Htm::Identity()).norm());
  }
  l.expect(worst_inv < 1e-12, "inv_htm residual " + num(worst_inv));
  const Vec3 v(0.3, -1.2, 2.0);
  l.expect((inv_htm(trn(v)) - trn(Vec3(-v))).norm() == 0.0, "inv_htm(trn(v)) != trn(-v)");
  l.expect((inv_htm(rotz(0.7)) - rotz(-0.7)).norm() < 1e-15, "inv_htm(rotz) != rotz(-theta)");

  double worst_skew = 0;
  for (int i = 0; i < 1000; ++i) {
    const Vec3 a = random_vec3(rng, 10.0), b = random_vec3(rng, 10.0);
    const Vec3 cross(a.y() * b.z() - a.z() * b.y(), a.z() * b.x() - a.x() * b.z(), a.x() * b.y() - a.y() * b.x());
    worst_skew = std::max(worst_skew, (skew(a) * b - cross).cwiseAbs().maxCoeff());
  }
  l.expect(worst_skew <= 1e-12, "skew error " + num(worst_skew));

  int dp_cases = 0;
  double worst_right_inverse = 0;
  std::uniform_int_distribution<int> dim(1, 6);
  while (dp_cases < 200) {
    const int rows = dim(rng);
    const int cols = rows + dim(rng) - 1;
    Mat m(rows, cols);
    for (int r = 0; r < rows; ++r) m.row(r) = random_vec(cols, rng).transpose();
    if (Eigen::JacobiSVD<Mat>(m).singularValues().minCoeff() <= 0.1) continue;
    ++dp_cases;
    const Mat exact = dp_inv(m, 0.0);
    worst_right_inverse = std::max(worst_right_inverse, (m * exact - Mat::Identity(rows, rows)).norm());
    double prev = INFINITY;
    for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) {
      const double gap = (dp_inv(m, eps) - exact).norm();
      l.expect(gap < prev, "dp_inv gap not decreasing at eps " + num(eps));
      prev = gap;
    }
  }
  l.expect(worst_right_inverse < 1e-8, "dp_inv right-inverse residual " + num(worst_right_inverse));

  std::uniform_real_distribution<double> angle(-kPi, kPi);
  std::uniform_real_distribution<double> pitch(-(kPi / 2 - 1e-3), kPi / 2 - 1e-3);
  double worst_euler = 0;
  for (int i = 0; i < 1000; ++i) {
    const double r = angle(rng), p = pitch(rng), y = angle(rng);
    const auto e = euler_angles(Htm(rotz(y) * roty(p) * rotx(r)));
    worst_euler = std::max({worst_euler, std::abs(e.roll - r), std::abs(e.pitch - p), std::abs(e.yaw - y)});
  }
  l.expect(worst_euler < 1e-9, "euler round trip error " + num(worst_euler));

  // f_i(x) = c_i + g_i.x + x^T Q_i x has Jacobian rows g_i + (Q_i + Q_i^T) x.
  double worst_nj = 0;
  for (int i = 0; i < 100; ++i) {
    const int n = dim(rng), m = dim(rng);
    std::vector<Mat> quad;
    Mat lin(m, n);
    VecX c = random_vec(m, rng);
    for (int k = 0; k < m; ++k) {
      lin.row(k) = random_vec(n, rng).transpose();
      Mat q(n, n);
      for (int r = 0; r < n; ++r) q.row(r) = random_vec(n, rng).transpose();
      quad.push_back(q);
    }
    auto f = [&](const VecX& x) {
      VecX out(m);
      for (int k = 0; k < m; ++k) out(k) = c(k) + lin.row(k).dot(x) + x.dot(quad[static_cast<std::size_t>(k)] * x);
      return out;
    };
    const VecX x = random_vec(n, rng, 2.0);
    Mat exact(m, n);
    for (int k = 0; k < m; ++k) {
      const Mat& q = quad[static_cast<std::size_t>(k)];
      exact.row(k) = lin.row(k) + (x.transpose() * (q + q.transpose()));
    }
    worst_nj = std::max(worst_nj, (num_jac(f, x, 1e-5) - exact).cwiseAbs().maxCoeff());
  }
  l.expect(worst_nj < 1e-8, "num_jac error " + num(worst_nj));

  const double elapsed = seconds_since(t0);
  l.expect(elapsed < 5.0, "runtime " + num(elapsed) + " s");
  return l.outcome("inv_htm " + num(worst_inv) + ", skew " + num(worst_skew) + ", dp_inv " +
                   num(worst_right_inverse) + ", euler " + num(worst_euler) + ", num_jac " + num(worst_nj) +
                   ", " + num(elapsed) + " s");
}

// ---------------------------------------------------------------- dynamics

// 1 kg point mass at the tip of a 1 m link, joint axis horizontal.
RobotModel pendulum() {
  LinkInertia tip;
  tip.mass = 1.0;
  return RobotModel("pendulum", {DhLink{0, 0, 0, 1.0, JointKind::revolute, -2 * kPi, 2 * kPi}}, rotx(kPi / 2),
                    Htm::Identity(), std::vector<LinkInertia>{tip});
}

Outcome dynamics_properties() {
  Ledger l;
  std::mt19937_64 rng(17);
  const std::vector<RobotModel> arms = {create_generic_6r(), create_kr5_like(), create_planar_2r(), create_scara()};

  double worst_asym = 0, min_eig = INFINITY;
  for (int i = 0; i < 500; ++i) {
    const RobotModel& arm = arms[static_cast<std::size_t>(i) % arms.size()];
    const Mat m = mass_matrix(arm, random_config(arm, rng));
    worst_asym = std::max(worst_asym, (m - m.transpose()).cwiseAbs().maxCoeff());
    min_eig = std::min(min_eig, Eigen::SelfAdjointEigenSolver<Mat>(m).eigenvalues().minCoeff());
  }
  l.expect(worst_asym <= 1e-10, "mass matrix asymmetry " + num(worst_asym));
  l.expect(min_eig > 0, "mass matrix eigenvalue " + num(min_eig));

  double worst_rnea = 0;
  for (int i = 0; i < 100; ++i) {
    const RobotModel& arm = arms[static_cast<std::size_t>(i) % arms.size()];
    const VecX q = random_config(arm, rng);
    const auto n = static_cast<Eigen::Index>(arm.dof());
    const VecX qd = random_vec(n, rng, 2.0), qdd = random_vec(n, rng, 3.0);
    const VecX split = mass_matrix(arm, q) * qdd + coriolis_vector(arm, q, qd) + gravity_vector(arm, q);
    worst_rnea = std::max(worst_rnea, (inverse_dynamics(arm, q, qd, qdd) - split).cwiseAbs().maxCoeff());
  }
  l.expect(worst_rnea < 1e-8, "RNEA split mismatch " + num(worst_rnea));

  const RobotModel p = pendulum();
  const VecX zero = VecX::Zero(1);
  const double g = -kStandardGravity.z();
  DynState s{VecX::Constant(1, -kPi / 2 + 0.01), zero, 0};
  const double e0 = kinetic_energy(p, s.q, s.qdot) + potential_energy(p, s.q);
  const double swing = e0 - potential_energy(p, VecX::Constant(1, -kPi / 2));
  std::vector<double> crossings;
  double prev = s.q(0) + kPi / 2, drift = 0;
  const double dt = 1e-3;
  for (int k = 0; k < 10000; ++k) {
    s = forward_step(p, s, zero, kStandardGravity, dt, Integrator::rk4);
    const double a = s.q(0) + kPi / 2;
    if (prev < 0 && a >= 0) crossings.push_back(s.t - dt * a / (a - prev));
    prev = a;
    drift = std::max(drift, std::abs(kinetic_energy(p, s.q, s.qdot) + potential_energy(p, s.q) - e0));
  }
  const double expected = 2 * kPi * std::sqrt(1.0 / g);
  double period = NAN;
  if (crossings.size() >= 2) {
    period = (crossings.back() - crossings.front()) / static_cast<double>(crossings.size() - 1);
  }
  const double period_err = std::abs(period - expected) / expected;
  l.expect(period_err < 0.01, "period error " + num(period_err));
  // Relative to the oscillation energy; relative to |E| it is smaller still.
  const double rel_drift = drift / swing;
  l.expect(rel_drift < 1e-3, "energy drift " + num(rel_drift));
  return l.outcome("asym " + num(worst_asym) + ", min eig " + num(min_eig) + ", RNEA " + num(worst_rnea) +
                   ", period err " + num(period_err) + ", drift " + num(rel_drift));
}

// ---------------------------------------------------------------- pedestrians

Outcome pedestrian_properties() {
  Ledger l;
  const auto t0 = std::chrono::steady_clock::now();

  CrowdWorld lone;
  Pedestrian p;
  p.id = "solo";
  p.waypoints = {Vec3(100, 0, 0)};
  lone.pedestrians.push_back(p);
  const int relax_steps = static_cast<int>(std::lround(5 * lone.params.relax_time / 0.01));
  for (int i = 0; i < relax_steps; ++i) step(lone, 0.01);
  const double v = lone.pedestrians[0].velocity.norm();
  const double vd = lone.pedestrians[0].desired_speed;
  l.expect(std::abs(v - vd) <= 0.01 * vd, "relaxed speed " + num(v));

  auto run = [&](std::vector<Vec3>& trace) {
    CrowdWorld w = make_evacuation(30, {8, 8}, 1.2, 42);
    std::size_t active = w.active_count();
    int crossings = 0;
    bool monotone = true;
    while (w.active_count() > 0 && w.t < 120.0) {
      std::vector<Vec3> before;
      for (const auto& q : w.pedestrians) before.push_back(q.position);
      step(w, 0.01);
      for (std::size_t i = 0; i < w.pedestrians.size(); ++i) {
        trace.push_back(w.pedestrians[i].position);
        for (const WallSegment& s : w.walls) crossings += segments_cross(before[i], w.pedestrians[i].position, s.p0, s.p1);
      }
      monotone = monotone && w.active_count() <= active;
      active = w.active_count();
    }
    return std::tuple{w.active_count(), w.t, crossings, monotone};
  };
  std::vector<Vec3> trace_a, trace_b;
  const auto [left, t_end, crossings, monotone] = run(trace_a);
  run(trace_b);
  l.expect(left == 0, std::to_string(left) + " pedestrians still inside");
  l.expect(monotone, "active count increased");
  l.expect(crossings == 0, std::to_string(crossings) + " wall penetrations");
  bool identical = trace_a.size() == trace_b.size();
  for (std::size_t i = 0; identical && i < trace_a.size(); ++i) {
    identical = std::memcmp(trace_a[i].data(), trace_b[i].data(), sizeof(double) * 3) == 0;
  }
  l.expect(identical, "seeded runs differ");
  const double elapsed = seconds_since(t0);
  l.expect(elapsed < 60.0, "runtime " + num(elapsed) + " s");
  return l.outcome("speed " + num(v) + " m/s after 5 tau, evacuated by t = " + num(t_end) + " s, " +
                   std::to_string(crossings) + " wall penetrations, " + num(elapsed) + " s");
}

// ---------------------------------------------------------------- serialization

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome serialization_properties() {
  Ledger l;
  std::mt19937_64 rng(23);

  int round_trips = 0;
  for (int i = 0; i < 200; ++i) {
    const SceneDocument doc = testing::random_document(rng, 1 + i % 12);
    const std::string bytes = to_json(doc);
    const SceneDocument back = from_json(bytes);
    const bool ok = back == doc && to_json(back) == bytes && to_json(doc) == bytes;
    round_trips += ok;
    l.expect(ok, "round trip " + std::to_string(i) + " differs");
  }

  const std::string golden = slurp(std::string(KINESIM_TEST_DATA) + "/empty.scene.json");
  std::string golden_bytes = golden;
  while (!golden_bytes.empty() && (golden_bytes.back() == '\n' || golden_bytes.back() == '\r')) golden_bytes.pop_back();
  l.expect(!golden_bytes.empty() && to_json(SceneDocument{}) == golden_bytes, "golden bytes changed");

  const std::vector<std::string> seeds = {to_json(SceneDocument{}), to_json(testing::random_document(rng, 5)), golden};
  const std::string alphabet = "{}[],:\"0123456789.-eE truefalsnl\\u";
  int rejected = 0, crashed = 0;
  for (int i = 0; i < 10000; ++i) {
    std::string s = seeds[static_cast<std::size_t>(rng() % seeds.size())];
    const int edits = 1 + static_cast<int>(rng() % 4);
    for (int e = 0; e < edits && !s.empty(); ++e) {
      const std::size_t pos = rng() % s.size();
      switch (rng() % 4) {
        case 0: s[pos] = alphabet[rng() % alphabet.size()]; break;
        case 1: s.erase(pos, 1 + rng() % 8); break;
        case 2: s.insert(pos, 1, alphabet[rng() % alphabet.size()]); break;
        default: s[pos] = static_cast<char>(rng() % 256); break;
      }
    }
    try {
      from_json(s);
    } catch (const SchemaError&) {
      ++rejected;
    } catch (const VersionError&) {
      ++rejected;
    } catch (...) {
      ++crashed;
    }
  }
  l.expect(crashed == 0, std::to_string(crashed) + " fuzz inputs escaped as foreign exceptions");

  int pages = 0;
  for (int i = 0; i < 20; ++i) {
    const SceneDocument doc = testing::random_document(rng, 6);
    const std::string html = export_html(doc, fallback_viewer_bundle());
    const bool ok = find_external_references(html).empty() && embedded_document(html) == to_json(doc);
    pages += ok;
    l.expect(ok, "page " + std::to_string(i) + " not self-contained");
  }
  return l.outcome(std::to_string(round_trips) + "/200 round trips, " + std::to_string(rejected) +
                   " fuzz inputs rejected cleanly, " + std::to_string(pages) + "/20 pages self-contained");
}

// ---------------------------------------------------------------- live

VecX q_of(const Json& frame, const std::string& robot) {
  for (const auto& c : frame["configs"]) {
    if (c["id"] == robot) return vec_from_value(c["q"], "q");
  }
  throw std::runtime_error("robot missing from frame");
}

Outcome live_protocol() {
  Ledger l;
  SceneDocument doc;
  doc.add_robot({"arm", create_planar_2r(), LinkStyle::primitive_chain, {}});
  doc.add_object({"crate", Box{0.2, 0.2, 0.2}, {}, trn(1.5, 0.0, 0.0)});
  doc.set_duration(10.0);
  const RobotModel arm = create_planar_2r();
  LiveServer server(LiveState(doc), {});

  testing::LiveClient a(server.port());
  testing::LiveClient b(server.port());
  const auto ha = a.next_of("hello"), hb = b.next_of("hello");
  l.expect(ha && hb, "missing hello");
  if (ha) l.expect(document_from_value((*ha)["document"]) == doc, "hello carries a different document");

  // Same broadcasts on both connections: compare frames with matching t.
  std::map<double, std::string> fa;
  for (int i = 0; i < 30; ++i) {
    if (auto f = a.next_of("frame")) fa[(*f)["t"].get<double>()] = write_canonical(*f);
  }
  int matched = 0, mismatched = 0;
  for (int i = 0; i < 20; ++i) {
    auto f = b.next_of("frame");
    if (!f) continue;
    auto it = fa.find((*f)["t"].get<double>());
    if (it == fa.end()) continue;
    (it->second == write_canonical(*f) ? matched : mismatched)++;
  }
  l.expect(matched >= 10 && mismatched == 0,
           "frame equality: " + std::to_string(matched) + " matched, " + std::to_string(mismatched) + " differ");
  b.close();

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> wild(-4.0, 4.0);
  for (int id = 0; id < 1000; ++id) {
    Json m = {{"request_id", id}};
    switch (rng() % 5) {
      case 0:
        m["type"] = "set_config";
        m["robot"] = "arm";
        m["q"] = {wild(rng), wild(rng)};
        break;
      case 1:
        m["type"] = "move_to_pose";
        m["robot"] = "arm";
        m["space"] = "joint";
        m["target"] = {wild(rng), wild(rng)};
        break;
      case 2: m["type"] = rng() % 3 ? "play" : "pause"; break;
      case 3:
        m["type"] = "seek";
        m["t"] = wild(rng) * 4;
        break;
      default: m["type"] = "unknown"; break;
    }
    a.send(m);
    // Spread the stream over several sim periods so frames interleave.
    if (id % 25 == 24) std::this_thread::sleep_for(milliseconds(10));
  }
  std::map<int, int> replies;
  int frames = 0, out_of_limits = 0;
  // Everything that arrives until the stream is answered, then a short drain.
  const auto give_up = std::chrono::steady_clock::now() + std::chrono::seconds(20);
  std::optional<std::chrono::steady_clock::time_point> drain_until;
  while (true) {
    const auto now = std::chrono::steady_clock::now();
    if (now > (drain_until ? *drain_until : give_up)) break;
    if (!drain_until && replies.size() >= 1000) drain_until = now + milliseconds(300);
    auto m = a.next(milliseconds(100));
    if (!m) continue;
    const auto& type = (*m)["type"];
    if (type == "frame") {
      ++frames;
      out_of_limits += !arm.within_limits(q_of(*m, "arm"));
    } else if (type == "ack" || type == "error") {
      ++replies[(*m)["request_id"].get<int>()];
    }
  }
  int duplicates = 0;
  for (const auto& [id, n] : replies) duplicates += n != 1;
  l.expect(replies.size() == 1000 && duplicates == 0,
           std::to_string(replies.size()) + " of 1000 requests answered, " + std::to_string(duplicates) + " more than once");
  l.expect(frames > 0, "no frames to check");
  l.expect(out_of_limits == 0, std::to_string(out_of_limits) + " frames outside the joint limits");

  Json far = {{"type", "move_to_pose"}, {"request_id", "far"}, {"robot", "arm"}, {"space", "task"}};
  far["target"] = htm_value(trn(2.5, 0.0, 0.0));
  a.send(far);
  const auto err = a.next_of("error");
  l.expect(err && (*err)["request_id"] == "far", "unreachable target did not produce an error");
  a.send({{"type", "play"}, {"request_id", "after"}});
  const auto ack = a.next_of("ack");
  l.expect(ack && (*ack)["request_id"] == "after", "session unusable after the error");

  return l.outcome("hello ok, " + std::to_string(matched) + " shared frames equal, " +
                   std::to_string(replies.size()) + "/1000 replies, " + std::to_string(frames) +
                   " frames within limits, unreachable target rejected");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"kinematics oracle suite", kinematics_oracles},
      {"ik success", ik_success},
      {"linalg properties", linalg_properties},
      {"dynamics", dynamics_properties},
      {"pedestrians", pedestrian_properties},
      {"serialization", serialization_properties},
      {"live protocol", live_protocol},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s  %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
