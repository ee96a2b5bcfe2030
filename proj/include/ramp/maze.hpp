#pragma once

#include "ramp/env.hpp"

#include <Eigen/Core>

#include <iosfwd>
#include <string>
#include <vector>

namespace ramp {

using Point2 = Eigen::Vector2d;

/// Axis-aligned, zero-thickness wall segment.
struct Wall {
  Point2 a;
  Point2 b;
  bool vertical() const { return a.x() == b.x(); }
  bool contains(const Point2& p) const;
};

/// Point-mass maze with Euler dynamics s' = s + a dt and the shaped reward
/// r = |g - s| - |g - s'|.
struct MazeSpec {
  std::string name;
  Point2 lo{-1.0, -1.0};
  Point2 hi{1.0, 1.0};
  std::vector<Wall> walls;
  Point2 start{0.0, 0.0};
  Point2 goal{0.0, 0.0};
  double dt = 0.01;
  int horizon = 200;

  bool in_bounds(const Point2& p) const;
  bool in_free_space(const Point2& p) const;
  /// Throws std::invalid_argument describing the first violated invariant.
  void validate() const;
};

/// Parses the line-oriented maze format:
///   bounds x1 y1 x2 y2 | wall x1 y1 x2 y2 | start x y | goal x y | dt v | horizon T
/// Blank lines and lines starting with '#' are ignored. Errors carry the line number.
MazeSpec parse_maze(std::istream& in, const std::string& name = "maze");
MazeSpec load_maze(const std::string& path);
std::string serialize_maze(const MazeSpec& spec);

MazeSpec easy_maze();
MazeSpec u_maze();
MazeSpec hard_maze();
/// Resolves "easy", "u" or "hard"; anything else is treated as a file path.
MazeSpec maze_by_name(const std::string& name_or_path);

/// One Euler step with wall collision handling. Displacement components
/// normal to a crossed wall are cancelled; the tangential part is kept.
StepResult maze_step(const MazeSpec& spec, const Vec& s, const Vec& a);
Vec maze_reset(const MazeSpec& spec, Rng& rng);

class MazeEnv final : public Env {
 public:
  explicit MazeEnv(MazeSpec spec);

  int state_dim() const override { return 2; }
  int action_dim() const override { return 2; }
  int horizon() const override { return spec_.horizon; }
  Vec reset(Rng& rng) const override { return maze_reset(spec_, rng); }
  StepResult step(const Vec& s, const Vec& a, Rng&) const override { return maze_step(spec_, s, a); }
  Vec random_action(Rng& rng) const override;

  const MazeSpec& spec() const { return spec_; }

 private:
  MazeSpec spec_;
};

}  // namespace ramp
