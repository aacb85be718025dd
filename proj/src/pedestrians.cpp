#include "kinesim/pedestrians.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

namespace kinesim {

namespace {

constexpr double kBodyHeight = 1.7;

Vec3 planar(const Vec3& v) { return Vec3(v.x(), v.y(), 0.0); }

double cross2(const Vec3& a, const Vec3& b) { return a.x() * b.y() - a.y() * b.x(); }

std::string ped_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "ped%03zu", i);
  return buf;
}

}  // namespace

void SfmParams::validate() const {
  const bool ok = relax_time > 0 && repulsion_range > 0 && wall_range > 0 &&
                  repulsion_strength >= 0 && wall_strength >= 0 && body_stiffness >= 0 &&
                  desired_speed_default >= 0 && mass_default > 0 && max_speed_factor >= 1;
  if (!ok) throw InvalidArgument("invalid social force parameters");
}

std::size_t CrowdWorld::active_count() const {
  return static_cast<std::size_t>(std::count_if(pedestrians.begin(), pedestrians.end(),
                                                [](const Pedestrian& p) { return p.active; }));
}

Vec3 closest_point(const WallSegment& w, const Vec3& p) {
  const Vec3 d = w.p1 - w.p0;
  const double len2 = d.squaredNorm();
  if (len2 == 0) return w.p0;
  const double s = std::clamp((p - w.p0).dot(d) / len2, 0.0, 1.0);
  return w.p0 + s * d;
}

bool segments_cross(const Vec3& a0, const Vec3& a1, const Vec3& b0, const Vec3& b1) {
  const Vec3 r = planar(a1 - a0), s = planar(b1 - b0), qp = planar(b0 - a0);
  const double denom = cross2(r, s);
  if (denom == 0) {
    // Parallel: only collinear overlap counts.
    if (cross2(qp, r) != 0) return false;
    const double rr = r.squaredNorm();
    if (rr == 0) return false;
    const double t0 = qp.dot(r) / rr, t1 = t0 + s.dot(r) / rr;
    return std::max(t0, t1) >= 0 && std::min(t0, t1) <= 1;
  }
  const double t = cross2(qp, s) / denom;
  const double u = cross2(qp, r) / denom;
  return t >= 0 && t <= 1 && u >= 0 && u <= 1;
}

Vec3 social_force(const Pedestrian& ped, const CrowdWorld& world) {
  const SfmParams& p = world.params;
  Vec3 force = Vec3::Zero();

  if (ped.waypoint_index < ped.waypoints.size()) {
    const Vec3 to_goal = planar(ped.waypoints[ped.waypoint_index] - ped.position);
    const double dist = to_goal.norm();
    const Vec3 e = dist > 1e-12 ? Vec3(to_goal / dist) : Vec3::Zero();
    force += ped.mass * (ped.desired_speed * e - planar(ped.velocity)) / p.relax_time;
  } else {
    force -= ped.mass * planar(ped.velocity) / p.relax_time;
  }

  for (std::size_t j = 0; j < world.pedestrians.size(); ++j) {
    const Pedestrian& other = world.pedestrians[j];
    if (!other.active || other.id == ped.id) continue;
    Vec3 away = planar(ped.position - other.position);
    const double dist = away.norm();
    // Coincident centres: push apart along x, ordered by id.
    const Vec3 n = dist > 1e-12 ? Vec3(away / dist) : Vec3(ped.id < other.id ? -1.0 : 1.0, 0, 0);
    const double overlap = ped.radius + other.radius - dist;
    force += p.repulsion_strength * std::exp(overlap / p.repulsion_range) * n;
    if (p.body_stiffness > 0 && overlap > 0) force += p.body_stiffness * overlap * n;
  }

  for (const WallSegment& w : world.walls) {
    const Vec3 away = planar(ped.position - closest_point(w, ped.position));
    const double dist = away.norm();
    if (dist <= 1e-12) continue;
    force += p.wall_strength * std::exp((ped.radius - dist) / p.wall_range) * (away / dist);
  }
  return force;
}

void step(CrowdWorld& world, double dt) {
  if (!(dt > 0) || !std::isfinite(dt)) throw InvalidArgument("step: dt must be > 0");
  std::vector<Vec3> forces(world.pedestrians.size(), Vec3::Zero());
  for (std::size_t i = 0; i < world.pedestrians.size(); ++i) {
    if (world.pedestrians[i].active) forces[i] = social_force(world.pedestrians[i], world);
  }
  for (std::size_t i = 0; i < world.pedestrians.size(); ++i) {
    Pedestrian& ped = world.pedestrians[i];
    if (!ped.active) continue;
    ped.velocity = planar(ped.velocity + forces[i] / ped.mass * dt);
    const double cap = world.params.max_speed_factor * ped.desired_speed;
    const double speed = ped.velocity.norm();
    if (speed > cap) ped.velocity *= cap / speed;
    const Vec3 before = ped.position;
    ped.position = ped.position + ped.velocity * dt;

    for (const Exit& e : world.exits) {
      if (e.absorbing && segments_cross(before, ped.position, e.segment.p0, e.segment.p1)) {
        ped.active = false;
        ped.velocity = Vec3::Zero();
        break;
      }
    }
    if (ped.active && ped.waypoint_index < ped.waypoints.size() &&
        planar(ped.waypoints[ped.waypoint_index] - ped.position).norm() < kWaypointReach) {
      ++ped.waypoint_index;
    }
  }
  world.t += dt;
}

CrowdWorld make_evacuation(std::size_t n, RoomSpec room, double door_width, std::uint64_t seed,
                           const SfmParams& params) {
  params.validate();
  constexpr double r_min = 0.22, r_max = 0.28, margin = 0.05;
  if (!(room.width > 2 * (r_max + margin)) || !(room.height > 2 * (r_max + margin))) {
    throw InvalidArgument("room too small for a pedestrian");
  }
  if (!(door_width > 2 * r_max) || !(door_width < room.height)) {
    throw InvalidArgument("door width must exceed a body diameter and fit in the wall");
  }
  const double w = room.width, h = room.height;
  const double lo = h - door_width;

  CrowdWorld world;
  world.params = params;
  world.walls = {{Vec3(0, 0, 0), Vec3(w, 0, 0)},
                 {Vec3(0, h, 0), Vec3(w, h, 0)},
                 {Vec3(0, 0, 0), Vec3(0, h, 0)},
                 {Vec3(w, 0, 0), Vec3(w, lo, 0)}};
  world.exits = {{{Vec3(w, lo, 0), Vec3(w, h, 0)}, true}};

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t max_tries = 10000;
  for (std::size_t i = 0; i < n; ++i) {
    Pedestrian ped;
    ped.id = ped_id(i);
    ped.radius = r_min + (r_max - r_min) * unit(rng);
    ped.mass = params.mass_default;
    ped.desired_speed = params.desired_speed_default;
    ped.waypoints = {Vec3(w, lo + door_width / 2, 0), Vec3(w + 2.0, lo + door_width / 2, 0)};
    const double inset = ped.radius + margin;
    bool placed = false;
    for (std::size_t attempt = 0; attempt < max_tries && !placed; ++attempt) {
      ped.position = Vec3(inset + (w - 2 * inset) * unit(rng), inset + (h - 2 * inset) * unit(rng), 0);
      placed = std::all_of(world.pedestrians.begin(), world.pedestrians.end(), [&](const Pedestrian& o) {
        return (o.position - ped.position).norm() >= o.radius + ped.radius + margin;
      });
    }
    if (!placed) {
      throw CapacityError("could not place pedestrian " + std::to_string(i + 1) + " of " +
                          std::to_string(n) + " without overlap");
    }
    world.pedestrians.push_back(std::move(ped));
  }
  return world;
}

namespace {

Htm body_pose(const Pedestrian& p) {
  return trn(Vec3(p.position.x(), p.position.y(), kBodyHeight / 2));
}

}  // namespace

CrowdRecording record_crowd(CrowdWorld& world, double dt, double t_end, std::size_t stride) {
  if (!(dt > 0) || !std::isfinite(dt)) throw InvalidArgument("record_crowd: dt must be > 0");
  if (!(t_end >= 0) || !std::isfinite(t_end)) throw InvalidArgument("record_crowd: t_end must be >= 0");
  if (stride < 1) throw InvalidArgument("record_crowd: stride must be >= 1");

  CrowdRecording rec;
  const double t0 = world.t;
  auto emit = [&](double t) {
    for (const Pedestrian& p : world.pedestrians) {
      if (p.active) rec.tracks[p.id].push_back({t, body_pose(p)});
    }
  };
  emit(t0);
  const auto steps = static_cast<std::size_t>(std::floor(t_end / dt + 1e-9));
  std::vector<bool> was_active(world.pedestrians.size());
  for (std::size_t k = 1; k <= steps; ++k) {
    for (std::size_t i = 0; i < world.pedestrians.size(); ++i) was_active[i] = world.pedestrians[i].active;
    step(world, dt);
    world.t = t0 + static_cast<double>(k) * dt;
    for (std::size_t i = 0; i < world.pedestrians.size(); ++i) {
      if (was_active[i] && !world.pedestrians[i].active) {
        rec.exits.push_back({world.pedestrians[i].id, world.t});
      }
    }
    if (k % stride == 0) emit(world.t);
    if (world.active_count() == 0 && !world.pedestrians.empty()) {
      rec.t_end = world.t;
      return rec;
    }
  }
  rec.t_end = t0 + static_cast<double>(steps) * dt;
  return rec;
}

SceneDocument crowd_document(const CrowdWorld& initial, const CrowdRecording& recording) {
  SceneDocument doc;
  double xmax = 1, ymax = 1;
  for (const WallSegment& w : initial.walls) {
    xmax = std::max({xmax, w.p0.x(), w.p1.x()});
    ymax = std::max({ymax, w.p0.y(), w.p1.y()});
  }
  Camera cam;
  cam.look_at = Vec3(xmax / 2, ymax / 2, 0);
  cam.position = Vec3(xmax / 2, -0.6 * ymax, 1.2 * std::max(xmax, ymax));
  doc.set_camera(cam);

  Material wall_mat;
  wall_mat.color = {120, 120, 130};
  for (std::size_t i = 0; i < initial.walls.size(); ++i) {
    const WallSegment& w = initial.walls[i];
    const Vec3 d = w.p1 - w.p0;
    const Vec3 mid = (w.p0 + w.p1) / 2;
    doc.add_object({"wall" + std::to_string(i), Box{d.norm(), 0.1, 1.0}, wall_mat,
                    trn(Vec3(mid.x(), mid.y(), 0.5)) * rotz(std::atan2(d.y(), d.x()))});
  }
  Material body;
  body.color = {40, 110, 200};
  for (const Pedestrian& p : initial.pedestrians) {
    doc.add_object({p.id, Cylinder{p.radius, kBodyHeight}, body, body_pose(p)});
  }
  for (const auto& [id, keys] : recording.tracks) {
    for (const PoseKey& k : keys) doc.set_pose_at(id, k.t, k.pose);
  }
  doc.set_duration(std::max(doc.duration(), recording.t_end));
  return doc;
}

}  // namespace kinesim
