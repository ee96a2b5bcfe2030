#include "ramp/maze.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ramp {

namespace {

bool crosses(const Point2& s, const Point2& p, const Wall& w) {
  const int n = w.vertical() ? 0 : 1;  // normal axis
  const int t = 1 - n;                 // tangential axis
  const double c = w.a[n];
  const double lo = std::min(w.a[t], w.b[t]);
  const double hi = std::max(w.a[t], w.b[t]);
  if (s[n] == p[n]) {
    // Motion parallel to the wall; only collinear overlap counts.
    if (s[n] != c) return false;
    return std::max(std::min(s[t], p[t]), lo) <= std::min(std::max(s[t], p[t]), hi);
  }
  const double u = (c - s[n]) / (p[n] - s[n]);
  if (u < 0.0 || u > 1.0) return false;
  const double at = s[t] + u * (p[t] - s[t]);
  return at >= lo && at <= hi;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

bool Wall::contains(const Point2& p) const {
  const int n = vertical() ? 0 : 1;
  const int t = 1 - n;
  return p[n] == a[n] && p[t] >= std::min(a[t], b[t]) && p[t] <= std::max(a[t], b[t]);
}

bool MazeSpec::in_bounds(const Point2& p) const {
  return p.x() >= lo.x() && p.x() <= hi.x() && p.y() >= lo.y() && p.y() <= hi.y();
}

bool MazeSpec::in_free_space(const Point2& p) const {
  if (!p.allFinite() || !in_bounds(p)) return false;
  for (const auto& w : walls)
    if (w.contains(p)) return false;
  return true;
}

void MazeSpec::validate() const {
  if (!(lo.x() < hi.x() && lo.y() < hi.y())) throw std::invalid_argument("maze bounds are empty");
  for (const auto& w : walls) {
    if (w.a.x() != w.b.x() && w.a.y() != w.b.y()) throw std::invalid_argument("maze wall is not axis-aligned");
    if (w.a == w.b) throw std::invalid_argument("maze wall has zero length");
  }
  if (!in_free_space(start)) throw std::invalid_argument("maze start is outside free space");
  if (!in_free_space(goal)) throw std::invalid_argument("maze goal is outside free space");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("maze dt must be positive");
  if (horizon < 1) throw std::invalid_argument("maze horizon must be >= 1");
}

MazeSpec parse_maze(std::istream& in, const std::string& name) {
  MazeSpec spec;
  spec.name = name;
  bool have_start = false;
  bool have_goal = false;
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& msg) {
    throw std::invalid_argument(name + ":" + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key) || key[0] == '#') continue;
    std::vector<double> nums;
    std::string tok;
    while (ls >> tok) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        fail("expected a number, got '" + tok + "'");
      }
      if (used != tok.size() || !std::isfinite(v)) fail("expected a number, got '" + tok + "'");
      nums.push_back(v);
    }
    auto expect = [&](std::size_t n) {
      if (nums.size() != n) fail("'" + key + "' takes " + std::to_string(n) + " values, got " + std::to_string(nums.size()));
    };
    if (key == "bounds") {
      expect(4);
      spec.lo = {nums[0], nums[1]};
      spec.hi = {nums[2], nums[3]};
    } else if (key == "wall") {
      expect(4);
      Wall w{{nums[0], nums[1]}, {nums[2], nums[3]}};
      if (w.a.x() != w.b.x() && w.a.y() != w.b.y()) fail("wall is not axis-aligned");
      if (w.a == w.b) fail("wall has zero length");
      spec.walls.push_back(w);
    } else if (key == "start") {
      expect(2);
      spec.start = {nums[0], nums[1]};
      have_start = true;
    } else if (key == "goal") {
      expect(2);
      spec.goal = {nums[0], nums[1]};
      have_goal = true;
    } else if (key == "dt") {
      expect(1);
      spec.dt = nums[0];
    } else if (key == "horizon") {
      expect(1);
      if (nums[0] != std::floor(nums[0]) || nums[0] < 1) fail("horizon must be a positive integer");
      spec.horizon = static_cast<int>(nums[0]);
    } else {
      fail("unknown directive '" + key + "'");
    }
  }
  if (!have_start) throw std::invalid_argument(name + ": missing 'start'");
  if (!have_goal) throw std::invalid_argument(name + ": missing 'goal'");
  spec.validate();
  return spec;
}

MazeSpec load_maze(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open maze file " + path);
  return parse_maze(in, path);
}

std::string serialize_maze(const MazeSpec& spec) {
  std::ostringstream os;
  os << "bounds " << fmt(spec.lo.x()) << ' ' << fmt(spec.lo.y()) << ' ' << fmt(spec.hi.x()) << ' '
     << fmt(spec.hi.y()) << '\n';
  for (const auto& w : spec.walls)
    os << "wall " << fmt(w.a.x()) << ' ' << fmt(w.a.y()) << ' ' << fmt(w.b.x()) << ' ' << fmt(w.b.y()) << '\n';
  os << "start " << fmt(spec.start.x()) << ' ' << fmt(spec.start.y()) << '\n';
  os << "goal " << fmt(spec.goal.x()) << ' ' << fmt(spec.goal.y()) << '\n';
  os << "dt " << fmt(spec.dt) << '\n';
  os << "horizon " << spec.horizon << '\n';
  return os.str();
}

MazeSpec easy_maze() {
  MazeSpec m;
  m.name = "easy";
  m.start = {-0.75, -0.75};
  m.goal = {0.75, 0.75};
  return m;
}

MazeSpec u_maze() {
  MazeSpec m;
  m.name = "u";
  // Cup opening upwards; the goal sits inside it.
  m.walls = {{{-0.5, -0.3}, {0.5, -0.3}}, {{-0.5, -0.3}, {-0.5, 0.5}}, {{0.5, -0.3}, {0.5, 0.5}}};
  m.start = {-0.75, -0.75};
  m.goal = {0.0, 0.1};
  return m;
}

MazeSpec hard_maze() {
  MazeSpec m;
  m.name = "hard";
  // Three horizontal corridors joined alternately on the right and left.
  m.walls = {{{-1.0, -0.33}, {0.6, -0.33}}, {{-0.6, 0.33}, {1.0, 0.33}}};
  m.start = {-0.75, -0.75};
  m.goal = {-0.75, 0.75};
  return m;
}

MazeSpec maze_by_name(const std::string& name_or_path) {
  if (name_or_path == "easy") return easy_maze();
  if (name_or_path == "u") return u_maze();
  if (name_or_path == "hard") return hard_maze();
  return load_maze(name_or_path);
}

StepResult maze_step(const MazeSpec& spec, const Vec& s_in, const Vec& a_in) {
  if (s_in.size() != 2 || a_in.size() != 2) throw std::invalid_argument("maze_step: state and action must be 2-d");
  const Point2 s = s_in;
  const Point2 a = a_in;
  if (!spec.in_free_space(s)) throw std::invalid_argument("maze_step: state outside free space");
  if (!a.allFinite() || a.cwiseAbs().maxCoeff() > 1.0) throw std::invalid_argument("maze_step: action outside [-1,1]^2");

  Point2 d = (s + a * spec.dt).cwiseMax(spec.lo).cwiseMin(spec.hi) - s;
  for (int iter = 0; iter < 4; ++iter) {
    bool hit = false;
    for (const auto& w : spec.walls) {
      if (!crosses(s, s + d, w)) continue;
      hit = true;
      const int n = w.vertical() ? 0 : 1;
      if (d[n] != 0.0)
        d[n] = 0.0;
      else
        d.setZero();
    }
    if (!hit) break;
  }
  Point2 next = s + d;
  if (!spec.in_free_space(next)) next = s;
  const double r = (spec.goal - s).norm() - (spec.goal - next).norm();
  return {Vec(next), r};
}

Vec maze_reset(const MazeSpec& spec, Rng&) { return spec.start; }

MazeEnv::MazeEnv(MazeSpec spec) : spec_(std::move(spec)) { spec_.validate(); }

Vec MazeEnv::random_action(Rng& rng) const {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vec a(2);
  a(0) = u(rng);
  a(1) = u(rng);
  return a;
}

}  // namespace ramp
