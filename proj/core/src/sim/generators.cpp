#include <algorithm>
#include <memory>
#include <string>

#include "vplan/sim/domains.hpp"
#include "vplan/sim/rng.hpp"
#include "vplan/sim/search.hpp"

namespace vp::sim {

namespace {

constexpr int kMaxAttempts = 100;
constexpr std::size_t kBfsStateLimit = 300'000;
constexpr std::size_t kGreedyStateLimit = 500'000;

struct Builder {
  pddl::ProblemDef p;
  std::vector<pddl::GroundAtom> init;

  void object(std::string name, std::string type) { p.objects.emplace_back(std::move(name), std::move(type)); }
  void fact(std::string pred, std::vector<std::string> args = {}) { init.push_back({std::move(pred), std::move(args)}); }
  void goal(std::string pred, std::vector<std::string> args = {}) {
    p.goal_pos.push_back({std::move(pred), std::move(args)});
  }

  pddl::ProblemDef finish(const std::string& domain, const std::string& name) {
    p.name = name;
    p.domain_name = domain;
    p.init = pddl::State(std::move(init));
    std::sort(p.goal_pos.begin(), p.goal_pos.end());
    p.goal_pos.erase(std::unique(p.goal_pos.begin(), p.goal_pos.end()), p.goal_pos.end());
    return std::move(p);
  }
};

std::string num(const std::string& prefix, int i) { return prefix + std::to_string(i); }

void require(bool ok, const std::string& message) {
  if (!ok) throw GenError(GenError::Kind::range, message);
}

void require_range(int v, int lo, int hi, const char* field) {
  require(v >= lo && v <= hi,
          std::string(field) + " = " + std::to_string(v) + " is outside " + std::to_string(lo) + "-" + std::to_string(hi));
}

// Random tower configuration: stacks[i] lists blocks bottom to top.
std::vector<std::vector<std::string>> random_towers(const std::vector<std::string>& blocks, Rng& rng) {
  std::vector<std::string> order = blocks;
  rng.shuffle(order);
  std::vector<std::vector<std::string>> stacks;
  for (const auto& b : order) {
    if (stacks.empty() || rng.chance(0.5)) {
      stacks.push_back({b});
    } else {
      stacks[rng.below(stacks.size())].push_back(b);
    }
  }
  return stacks;
}

void gen_blocksworld(const GenParams& gp, Rng& rng, Builder& b) {
  std::vector<std::string> blocks;
  for (int i = 1; i <= gp.blocks; ++i) blocks.push_back(num("b", i));
  for (const auto& x : blocks) b.object(x, "block");
  b.fact("handempty");
  for (const auto& stack : random_towers(blocks, rng)) {
    b.fact("ontable", {stack.front()});
    for (std::size_t i = 1; i < stack.size(); ++i) b.fact("on", {stack[i], stack[i - 1]});
    b.fact("clear", {stack.back()});
  }
  for (const auto& stack : random_towers(blocks, rng)) {
    for (std::size_t i = 1; i < stack.size(); ++i) b.goal("on", {stack[i], stack[i - 1]});
  }
}

// Cars assigned to curbs, at most two per curb: slot 0 at the curb, slot 1
// double-parked behind it.
std::vector<std::vector<std::string>> random_parking(const std::vector<std::string>& cars, int curbs, Rng& rng) {
  std::vector<std::vector<std::string>> lanes(static_cast<std::size_t>(curbs));
  std::vector<std::string> order = cars;
  rng.shuffle(order);
  for (const auto& car : order) {
    std::vector<std::size_t> open;
    for (std::size_t i = 0; i < lanes.size(); ++i) {
      if (lanes[i].size() < 2) open.push_back(i);
    }
    lanes[open[rng.below(open.size())]].push_back(car);
  }
  return lanes;
}

void gen_parking(const GenParams& gp, Rng& rng, Builder& b) {
  std::vector<std::string> curbs, cars;
  for (int i = 0; i < gp.curbs; ++i) curbs.push_back(num("curb_", i));
  for (int i = 0; i < gp.cars; ++i) cars.push_back(num("car_", i));
  for (const auto& c : curbs) b.object(c, "curb");
  for (const auto& c : cars) b.object(c, "car");
  auto start = random_parking(cars, gp.curbs, rng);
  for (std::size_t i = 0; i < start.size(); ++i) {
    const auto& lane = start[i];
    if (lane.empty()) {
      b.fact("curb-clear", {curbs[i]});
      continue;
    }
    b.fact("at-curb", {lane[0]});
    b.fact("at-curb-num", {lane[0], curbs[i]});
    if (lane.size() == 2) b.fact("behind-car", {lane[1], lane[0]});
    b.fact("car-clear", {lane.back()});
  }
  for (const auto& x : cars) {
    for (const auto& y : cars) {
      if (x != y) b.fact("distinct", {x, y});
    }
  }
  auto target = random_parking(cars, gp.curbs, rng);
  for (std::size_t i = 0; i < target.size(); ++i) {
    const auto& lane = target[i];
    if (lane.empty()) continue;
    b.goal("at-curb-num", {lane[0], curbs[i]});
    if (lane.size() == 2) b.goal("behind-car", {lane[1], lane[0]});
  }
}

std::string cell(int row, int col) { return "f" + std::to_string(row) + "-" + std::to_string(col) + "f"; }

void gen_tetris(const GenParams& gp, Rng& rng, Builder& b) {
  const int n = gp.grid;
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) b.object(cell(r, c), "position");
  }
  std::vector<std::vector<bool>> used(static_cast<std::size_t>(n), std::vector<bool>(static_cast<std::size_t>(n)));
  auto free_cell = [&](int r, int c) {
    return r >= 0 && c >= 0 && r < n && c < n && !used[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  };
  auto take = [&](int r, int c) { used[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = true; };
  const int dr[4] = {1, -1, 0, 0};
  const int dc[4] = {0, 0, 1, -1};
  int squares = 0, straights = 0, ls = 0;
  for (int i = 0; i < gp.pieces; ++i) {
    // Pieces cycle through square, straight two and L.
    int kind = i % 3;
    std::vector<std::vector<std::pair<int, int>>> options;
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        if (!free_cell(r, c)) continue;
        if (kind == 0) {
          options.push_back({{r, c}});
        } else if (kind == 1) {
          for (int d = 0; d < 4; ++d) {
            if (free_cell(r + dr[d], c + dc[d])) options.push_back({{r, c}, {r + dr[d], c + dc[d]}});
          }
        } else if (free_cell(r + 1, c) && free_cell(r, c + 1)) {
          // upper end, corner, right end
          options.push_back({{r + 1, c}, {r, c}, {r, c + 1}});
        }
      }
    }
    if (options.empty()) throw GenError(GenError::Kind::range, "tetris grid too small for the requested pieces");
    const auto& pick = options[rng.below(options.size())];
    for (auto [r, c] : pick) take(r, c);
    if (kind == 0) {
      std::string id = num("square_", ++squares);
      b.object(id, "one_square");
      b.fact("at_square", {id, cell(pick[0].first, pick[0].second)});
    } else if (kind == 1) {
      std::string id = num("straight_", ++straights);
      b.object(id, "two_straight");
      b.fact("at_two", {id, cell(pick[0].first, pick[0].second), cell(pick[1].first, pick[1].second)});
    } else {
      std::string id = num("l_", ++ls);
      b.object(id, "right_l");
      b.fact("at_l", {id, cell(pick[0].first, pick[0].second), cell(pick[1].first, pick[1].second),
                      cell(pick[2].first, pick[2].second)});
    }
  }
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      if (free_cell(r, c)) b.fact("clear", {cell(r, c)});
      for (int d = 0; d < 4; ++d) {
        int r2 = r + dr[d], c2 = c + dc[d];
        if (r2 < 0 || c2 < 0 || r2 >= n || c2 >= n) continue;
        b.fact("connected", {cell(r, c), cell(r2, c2)});
      }
      if (c + 1 < n) b.fact("east", {cell(r, c), cell(r, c + 1)});
      if (r + 1 < n) b.fact("north", {cell(r, c), cell(r + 1, c)});
    }
  }
  // Goal: the upper half of the grid is free.
  for (int r = n / 2; r < n; ++r) {
    for (int c = 0; c < n; ++c) b.goal("clear", {cell(r, c)});
  }
}

std::string tile(int row, int col) { return "tile_" + std::to_string(row) + "-" + std::to_string(col); }

void gen_floortile(const GenParams& gp, Rng& rng, Builder& b) {
  // Row 0 is an unpainted service row; rows 1..rows are painted.
  const std::vector<std::string> palette = {"white", "black"};
  for (int r = 0; r <= gp.rows; ++r) {
    for (int c = 0; c < gp.cols; ++c) b.object(tile(r, c), "tile");
  }
  for (int i = 1; i <= gp.robots; ++i) b.object(num("robot", i), "robot");
  for (int i = 0; i < gp.colors; ++i) b.object(palette[static_cast<std::size_t>(i)], "color");
  std::vector<std::pair<int, int>> cells;
  for (int r = 0; r <= gp.rows; ++r) {
    for (int c = 0; c < gp.cols; ++c) cells.emplace_back(r, c);
  }
  rng.shuffle(cells);
  std::vector<std::pair<int, int>> occupied(cells.begin(), cells.begin() + gp.robots);
  for (int i = 0; i < gp.robots; ++i) {
    auto [r, c] = occupied[static_cast<std::size_t>(i)];
    std::string robot = num("robot", i + 1);
    b.fact("robot-at", {robot, tile(r, c)});
    b.fact("robot-has", {robot, palette[rng.below(static_cast<std::uint64_t>(gp.colors))]});
  }
  for (int i = 0; i < gp.colors; ++i) b.fact("available-color", {palette[static_cast<std::size_t>(i)]});
  for (int r = 0; r <= gp.rows; ++r) {
    for (int c = 0; c < gp.cols; ++c) {
      if (std::find(occupied.begin(), occupied.end(), std::make_pair(r, c)) == occupied.end())
        b.fact("clear", {tile(r, c)});
      if (r + 1 <= gp.rows) {
        b.fact("up", {tile(r + 1, c), tile(r, c)});
        b.fact("down", {tile(r, c), tile(r + 1, c)});
      }
      if (c + 1 < gp.cols) {
        b.fact("right", {tile(r, c + 1), tile(r, c)});
        b.fact("left", {tile(r, c), tile(r, c + 1)});
      }
    }
  }
  for (int r = 1; r <= gp.rows; ++r) {
    for (int c = 0; c < gp.cols; ++c) {
      b.goal("painted", {tile(r, c), palette[static_cast<std::size_t>((r + c) % gp.colors)]});
    }
  }
}

void gen_elevator(const GenParams& gp, Rng& rng, Builder& b) {
  constexpr int kSlowCapacity = 2;
  constexpr int kFastCapacity = 3;
  const int counts = std::max(gp.floors, kFastCapacity + 1);
  for (int i = 0; i < counts; ++i) b.object(num("n", i), "count");
  for (int i = 0; i < gp.passengers; ++i) b.object(num("p", i), "passenger");
  b.object("slow0", "slow-elevator");
  b.object("fast0", "fast-elevator");
  for (int i = 0; i + 1 < counts; ++i) b.fact("next", {num("n", i), num("n", i + 1)});
  for (int i = 0; i < gp.floors; ++i) {
    for (int j = i + 1; j < gp.floors; ++j) b.fact("above", {num("n", i), num("n", j)});
  }
  std::vector<int> fast_floors;
  for (int f = 0; f < gp.floors; ++f) {
    b.fact("reachable-floor", {"slow0", num("n", f)});
    if (f % 2 == 0) {
      b.fact("reachable-floor", {"fast0", num("n", f)});
      fast_floors.push_back(f);
    }
  }
  for (int c = 1; c <= kSlowCapacity; ++c) b.fact("can-hold", {"slow0", num("n", c)});
  for (int c = 1; c <= kFastCapacity; ++c) b.fact("can-hold", {"fast0", num("n", c)});
  b.fact("passengers", {"slow0", "n0"});
  b.fact("passengers", {"fast0", "n0"});
  b.fact("lift-at", {"slow0", num("n", rng.range(0, gp.floors - 1))});
  b.fact("lift-at", {"fast0", num("n", fast_floors[rng.below(fast_floors.size())])});
  for (int i = 0; i < gp.passengers; ++i) {
    int from = rng.range(0, gp.floors - 1);
    int to = rng.range(0, gp.floors - 2);
    if (to >= from) ++to;
    b.fact("passenger-at", {num("p", i), num("n", from)});
    b.goal("passenger-at", {num("p", i), num("n", to)});
  }
}

void gen_barman(const GenParams& gp, Rng& rng, Builder& b) {
  const int shots = gp.cocktails + 1;
  b.object("left", "hand");
  b.object("right", "hand");
  for (int i = 1; i <= shots; ++i) b.object(num("shot", i), "shot");
  b.object("shaker1", "shaker");
  for (int i = 1; i <= gp.ingredients; ++i) b.object(num("ingredient", i), "ingredient");
  for (int i = 1; i <= gp.cocktails; ++i) b.object(num("cocktail", i), "cocktail");
  for (int i = 1; i <= gp.ingredients; ++i) b.object(num("dispenser", i), "dispenser");
  for (int i = 0; i <= 2; ++i) b.object(num("l", i), "level");

  for (const char* h : {"left", "right"}) b.fact("handempty", {h});
  for (int i = 1; i <= shots; ++i) {
    for (const char* p : {"ontable", "clean", "empty"}) b.fact(p, {num("shot", i)});
  }
  for (const char* p : {"ontable", "clean", "empty"}) b.fact(p, {"shaker1"});
  b.fact("shaker-empty-level", {"shaker1", "l0"});
  b.fact("shaker-level", {"shaker1", "l0"});
  b.fact("next", {"l0", "l1"});
  b.fact("next", {"l1", "l2"});
  for (int i = 1; i <= gp.ingredients; ++i) b.fact("dispenses", {num("dispenser", i), num("ingredient", i)});

  // Distinct ordered ingredient pairs as recipes.
  std::vector<std::pair<int, int>> recipes;
  for (int x = 1; x <= gp.ingredients; ++x) {
    for (int y = 1; y <= gp.ingredients; ++y) {
      if (x != y) recipes.emplace_back(x, y);
    }
  }
  rng.shuffle(recipes);
  for (int i = 1; i <= gp.cocktails; ++i) {
    auto [x, y] = recipes[static_cast<std::size_t>(i - 1)];
    b.fact("cocktail-part1", {num("cocktail", i), num("ingredient", x)});
    b.fact("cocktail-part2", {num("cocktail", i), num("ingredient", y)});
  }
  // Every cocktail is served once; the last shot is left for mixing.
  std::vector<int> served;
  for (int i = 1; i <= gp.cocktails; ++i) served.push_back(i);
  rng.shuffle(served);
  for (int i = 1; i <= gp.cocktails; ++i) {
    b.goal("contains", {num("shot", i), num("cocktail", served[static_cast<std::size_t>(i - 1)])});
  }
}

bool acceptable(const pddl::ProblemDef& problem, DomainId id, const GenParams& gp) {
  auto task = std::make_shared<Task>(corpus_domain(id), problem);
  BfsResult r = bfs(*task, gp.bfs_cap, kBfsStateLimit);
  if (r.distance) return *r.distance > 0;
  if (!r.truncated) return false;
  auto plan = greedy_plan(*task, kGreedyStateLimit);
  return plan && !plan->empty();
}

}  // namespace

GenParams GenParams::smallest(DomainId id, std::uint64_t seed) {
  GenParams p;
  p.seed = seed;
  if (id == DomainId::blocksworld) p.blocks = 3 + static_cast<int>(seed % 3);
  return p;
}

void check_params(DomainId id, const GenParams& p) {
  require(p.bfs_cap >= 0, "bfs_cap must be non-negative");
  switch (id) {
    case DomainId::blocksworld:
      require_range(p.blocks, 3, 20, "blocks");
      break;
    case DomainId::parking:
      require_range(p.curbs, 4, 5, "curbs");
      require_range(p.cars, 4, 6, "cars");
      // Moving needs a free slot somewhere.
      require(p.cars < 2 * p.curbs, "cars must leave at least one free slot (cars < 2 * curbs)");
      break;
    case DomainId::tetris:
      require(p.grid == 4 || p.grid == 6, "grid must be 4 or 6");
      require_range(p.pieces, 1, p.grid == 4 ? 3 : 6, "pieces");
      break;
    case DomainId::floortile:
      require_range(p.rows, 2, 3, "rows");
      require_range(p.cols, 3, 5, "cols");
      require_range(p.robots, 1, 2, "robots");
      require_range(p.colors, 2, 2, "colors");
      break;
    case DomainId::elevator:
      require_range(p.floors, 4, 5, "floors");
      require_range(p.passengers, 4, 12, "passengers");
      break;
    case DomainId::barman:
      require_range(p.cocktails, 2, 3, "cocktails");
      require_range(p.ingredients, 3, 3, "ingredients");
      break;
  }
}

pddl::ProblemDef gen_instance(DomainId id, const GenParams& params) {
  check_params(id, params);
  const std::string domain(to_string(id));
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Rng rng(derive_seed({params.seed, static_cast<std::uint64_t>(id), static_cast<std::uint64_t>(attempt)}));
    Builder b;
    switch (id) {
      case DomainId::blocksworld: gen_blocksworld(params, rng, b); break;
      case DomainId::parking: gen_parking(params, rng, b); break;
      case DomainId::tetris: gen_tetris(params, rng, b); break;
      case DomainId::floortile: gen_floortile(params, rng, b); break;
      case DomainId::elevator: gen_elevator(params, rng, b); break;
      case DomainId::barman: gen_barman(params, rng, b); break;
    }
    pddl::ProblemDef problem = b.finish(domain, domain + "-" + std::to_string(params.seed));
    if (acceptable(problem, id, params)) return problem;
  }
  throw GenError(GenError::Kind::unsolvable,
                 domain + " seed " + std::to_string(params.seed) + ": no solvable instance after 100 attempts");
}

}  // namespace vp::sim
