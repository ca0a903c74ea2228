#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ecotrade/error.hpp"

namespace ecotrade {

using PlayerId = std::int64_t;
using ParcelId = std::int64_t;
using Ecopoints = std::int64_t;
using Money = std::int64_t;

// Actor id used for server-originated events (ticks, game start).
inline constexpr PlayerId kSystemActor = 0;

enum class LandUse : std::uint8_t { Conservation, Agriculture };
enum class Neighborhood : std::uint8_t { Moore8, VonNeumann4 };
enum class AllocationMode : std::uint8_t { Interleaved, Blocks };
enum class Phase : std::uint8_t { Lobby, Running, Finished };

// ---------------------------------------------------------------------------
// Enum <-> text. Specialized per enum; shared by the wire codec, the rules
// file and the action log so every surface spells values the same way.

template <class E>
struct EnumNames;

template <>
struct EnumNames<LandUse> {
  static constexpr std::array<std::string_view, 2> names = {"Conservation", "Agriculture"};
};
template <>
struct EnumNames<Neighborhood> {
  static constexpr std::array<std::string_view, 2> names = {"Moore8", "VonNeumann4"};
};
template <>
struct EnumNames<AllocationMode> {
  static constexpr std::array<std::string_view, 2> names = {"Interleaved", "Blocks"};
};
template <>
struct EnumNames<Phase> {
  static constexpr std::array<std::string_view, 3> names = {"Lobby", "Running", "Finished"};
};

template <class E>
concept NamedEnum = std::is_enum_v<E> && requires { EnumNames<E>::names; };

template <NamedEnum E>
constexpr std::string_view enum_name(E value) {
  return EnumNames<E>::names[static_cast<std::size_t>(value)];
}

template <NamedEnum E>
constexpr std::optional<E> parse_enum(std::string_view text) {
  const auto& names = EnumNames<E>::names;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == text) return static_cast<E>(i);
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------

struct Coord {
  std::int64_t row = 0;
  std::int64_t col = 0;
  auto operator<=>(const Coord&) const = default;
};

struct ValueRange {
  std::int64_t min = 0;
  std::int64_t max = 0;
  bool operator==(const ValueRange&) const = default;
};

// Hard caps on rule values accepted from clients. They bound snapshot size
// and keep every money product inside int64.
inline constexpr std::int64_t kMaxGridSide = 100;
inline constexpr std::int64_t kMaxValue = 1'000'000'000;

struct GameRules {
  std::int64_t width = 10;
  std::int64_t height = 10;
  Neighborhood neighborhood = Neighborhood::Moore8;
  Ecopoints bonus_weight = 1;
  Ecopoints obligation = 40;
  Money penalty_rate = 2;
  std::int64_t tick_seconds = 10;
  std::int64_t total_ticks = 30;
  ValueRange base_credit_range{1, 6};
  ValueRange agri_revenue_range{1, 10};
  Money initial_cash = 100;
  AllocationMode allocation_mode = AllocationMode::Blocks;
  std::uint64_t landscape_seed = 1;

  bool operator==(const GameRules&) const = default;
};

/// Throws Error{InvalidRules} naming the first violated constraint.
inline void validate(const GameRules& rules) {
  auto fail = [](const std::string& reason, const char* field) {
    throw Error(ErrorCode::InvalidRules, reason, field);
  };
  auto bounded = [&](std::int64_t v, std::int64_t lo, std::int64_t hi, const char* field) {
    if (v < lo || v > hi) {
      fail(std::string(field) + " must be in [" + std::to_string(lo) + ", " +
               std::to_string(hi) + "], got " + std::to_string(v),
           field);
    }
  };
  bounded(rules.width, 1, kMaxGridSide, "width");
  bounded(rules.height, 1, kMaxGridSide, "height");
  bounded(rules.bonus_weight, 0, kMaxValue, "bonus_weight");
  bounded(rules.obligation, 0, kMaxValue, "obligation");
  bounded(rules.penalty_rate, 0, kMaxValue, "penalty_rate");
  bounded(rules.tick_seconds, 1, 86'400, "tick_seconds");
  bounded(rules.total_ticks, 1, 1'000'000, "total_ticks");
  bounded(rules.initial_cash, 0, kMaxValue, "initial_cash");
  bounded(rules.base_credit_range.min, 0, kMaxValue, "base_credit_range");
  bounded(rules.base_credit_range.max, 0, kMaxValue, "base_credit_range");
  bounded(rules.agri_revenue_range.min, 0, kMaxValue, "agri_revenue_range");
  bounded(rules.agri_revenue_range.max, 0, kMaxValue, "agri_revenue_range");
  if (rules.base_credit_range.min > rules.base_credit_range.max)
    fail("base_credit_range min exceeds max", "base_credit_range");
  if (rules.agri_revenue_range.min > rules.agri_revenue_range.max)
    fail("agri_revenue_range min exceeds max", "agri_revenue_range");
}

struct Parcel {
  ParcelId parcel_id = 0;
  Coord coord;
  PlayerId owner = 0;
  LandUse land_use = LandUse::Agriculture;
  Ecopoints base_credit = 0;
  Money agri_revenue = 0;

  bool operator==(const Parcel&) const = default;
};

/// Dense row-major grid; parcel_id equals the row-major index.
struct Landscape {
  std::int64_t width = 0;
  std::int64_t height = 0;
  std::vector<Parcel> parcels;

  bool operator==(const Landscape&) const = default;

  std::int64_t size() const { return width * height; }
  bool in_bounds(Coord c) const {
    return c.row >= 0 && c.row < height && c.col >= 0 && c.col < width;
  }
  bool contains(ParcelId id) const { return id >= 0 && id < size(); }
  ParcelId index_of(Coord c) const { return c.row * width + c.col; }

  const Parcel& at(ParcelId id) const { return parcels[checked(id)]; }
  Parcel& at(ParcelId id) { return parcels[checked(id)]; }
  const Parcel& at(Coord c) const { return parcels[checked(c)]; }
  Parcel& at(Coord c) { return parcels[checked(c)]; }

 private:
  std::size_t checked(ParcelId id) const {
    if (!contains(id)) throw Error(ErrorCode::UnknownParcel, "parcel " + std::to_string(id));
    return static_cast<std::size_t>(id);
  }
  std::size_t checked(Coord c) const {
    if (!in_bounds(c)) {
      throw Error(ErrorCode::OutOfBounds,
                  "(" + std::to_string(c.row) + ", " + std::to_string(c.col) + ")");
    }
    return static_cast<std::size_t>(index_of(c));
  }
};

struct PlayerState {
  PlayerId player_id = 0;
  std::string name;
  Money cash = 0;
  Ecopoints net_traded = 0;
  std::vector<ParcelId> owned_parcels;  // ascending

  bool operator==(const PlayerState&) const = default;
};

struct GameState {
  GameRules rules;
  Landscape landscape;
  std::vector<PlayerState> players;  // in join order
  std::int64_t tick = 0;
  Phase phase = Phase::Lobby;

  bool operator==(const GameState&) const = default;

  const PlayerState* find_player(PlayerId id) const {
    auto it = std::find_if(players.begin(), players.end(),
                           [id](const PlayerState& p) { return p.player_id == id; });
    return it == players.end() ? nullptr : &*it;
  }
  PlayerState* find_player(PlayerId id) {
    return const_cast<PlayerState*>(std::as_const(*this).find_player(id));
  }
  const PlayerState& player(PlayerId id) const {
    const PlayerState* p = find_player(id);
    if (p == nullptr) throw Error(ErrorCode::UnknownPlayer, "player " + std::to_string(id));
    return *p;
  }
  PlayerState& player(PlayerId id) {
    return const_cast<PlayerState&>(std::as_const(*this).player(id));
  }
};

// ---------------------------------------------------------------------------
// Neighborhoods. No wraparound; edge and corner cells get clipped sets.

namespace detail {
inline constexpr std::array<Coord, 8> kMooreOffsets = {
    Coord{-1, -1}, Coord{-1, 0}, Coord{-1, 1}, Coord{0, -1},
    Coord{0, 1},   Coord{1, -1}, Coord{1, 0},  Coord{1, 1}};
inline constexpr std::array<Coord, 4> kVonNeumannOffsets = {
    Coord{-1, 0}, Coord{0, -1}, Coord{0, 1}, Coord{1, 0}};
}  // namespace detail

/// Calls fn(const Parcel&) for each in-bounds neighbor, row-major order.
template <class Fn>
void for_each_neighbor(const Landscape& landscape, Neighborhood hood, Coord c, Fn&& fn) {
  auto visit = [&](const auto& offsets) {
    for (const Coord& d : offsets) {
      const Coord n{c.row + d.row, c.col + d.col};
      if (landscape.in_bounds(n)) fn(landscape.parcels[landscape.index_of(n)]);
    }
  };
  if (hood == Neighborhood::Moore8) {
    visit(detail::kMooreOffsets);
  } else {
    visit(detail::kVonNeumannOffsets);
  }
}

inline std::vector<Coord> neighbors(const Landscape& landscape, Coord c, Neighborhood hood) {
  if (!landscape.in_bounds(c)) {
    throw Error(ErrorCode::OutOfBounds,
                "(" + std::to_string(c.row) + ", " + std::to_string(c.col) + ")");
  }
  std::vector<Coord> out;
  for_each_neighbor(landscape, hood, c, [&](const Parcel& p) { out.push_back(p.coord); });
  return out;
}

inline std::int64_t conserved_neighbor_count(const Landscape& landscape, Neighborhood hood,
                                             Coord c) {
  std::int64_t n = 0;
  for_each_neighbor(landscape, hood, c, [&](const Parcel& p) {
    if (p.land_use == LandUse::Conservation) ++n;
  });
  return n;
}

/// Credits a parcel yields right now: zero under agriculture, otherwise its
/// base value plus bonus_weight per conserved neighbor (any owner).
inline Ecopoints parcel_credits(const Landscape& landscape, Coord c, const GameRules& rules) {
  const Parcel& p = landscape.at(c);
  if (p.land_use == LandUse::Agriculture) return 0;
  return p.base_credit + rules.bonus_weight * conserved_neighbor_count(landscape, rules.neighborhood, c);
}

inline Ecopoints parcel_credits(const Landscape& landscape, ParcelId id, const GameRules& rules) {
  return parcel_credits(landscape, landscape.at(id).coord, rules);
}

inline Ecopoints production_of(const Landscape& landscape, std::span<const ParcelId> owned,
                               const GameRules& rules) {
  Ecopoints total = 0;
  for (ParcelId id : owned) total += parcel_credits(landscape, id, rules);
  return total;
}

inline Ecopoints player_production(const GameState& state, PlayerId id) {
  return production_of(state.landscape, state.player(id).owned_parcels, state.rules);
}

inline Ecopoints effective_balance(const GameState& state, PlayerId id) {
  return player_production(state, id) + state.player(id).net_traded;
}

inline Ecopoints shortfall(const GameState& state, PlayerId id) {
  return std::max<Ecopoints>(0, state.rules.obligation - effective_balance(state, id));
}

// ---------------------------------------------------------------------------
// Landscape generation.

namespace detail {

// Portable uniform draw in [lo, hi]. std::uniform_int_distribution is
// implementation-defined, so the range reduction is done here by rejection.
inline std::int64_t uniform_draw(std::mt19937_64& rng, ValueRange range) {
  const auto span = static_cast<std::uint64_t>(range.max - range.min) + 1;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % span;
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return range.min + static_cast<std::int64_t>(x % span);
}

inline std::size_t owner_index(std::int64_t parcel, std::int64_t parcels, std::int64_t players,
                               AllocationMode mode) {
  if (mode == AllocationMode::Interleaved) return static_cast<std::size_t>(parcel % players);
  const std::int64_t run = (parcels + players - 1) / players;
  return static_cast<std::size_t>(parcel / run);
}

}  // namespace detail

/// Draws base credits and revenues, hands out ownership, then applies the
/// initial-feasibility rule: every parcel starts as agriculture and each
/// player (in list order) conserves their lowest-revenue parcels, ties by
/// parcel id, until production covers the obligation or nothing is left.
inline Landscape generate_landscape(const GameRules& rules, std::span<const PlayerId> player_ids) {
  validate(rules);
  if (player_ids.empty()) throw Error(ErrorCode::TooFewParcels, "no players");
  const std::int64_t n = rules.width * rules.height;
  const auto p = static_cast<std::int64_t>(player_ids.size());
  if (n < p) {
    throw Error(ErrorCode::TooFewParcels,
                std::to_string(n) + " parcels for " + std::to_string(p) + " players");
  }
  if (rules.allocation_mode == AllocationMode::Blocks) {
    const std::int64_t run = (n + p - 1) / p;
    if ((p - 1) * run >= n) {
      throw Error(ErrorCode::TooFewParcels,
                  "block allocation leaves a player without parcels");
    }
  }

  Landscape land{rules.width, rules.height, {}};
  land.parcels.reserve(static_cast<std::size_t>(n));
  std::mt19937_64 rng(rules.landscape_seed);
  for (std::int64_t i = 0; i < n; ++i) {
    Parcel parcel;
    parcel.parcel_id = i;
    parcel.coord = Coord{i / rules.width, i % rules.width};
    parcel.owner = player_ids[detail::owner_index(i, n, p, rules.allocation_mode)];
    parcel.land_use = LandUse::Agriculture;
    parcel.base_credit = detail::uniform_draw(rng, rules.base_credit_range);
    parcel.agri_revenue = detail::uniform_draw(rng, rules.agri_revenue_range);
    land.parcels.push_back(parcel);
  }

  for (PlayerId player : player_ids) {
    std::vector<ParcelId> owned;
    for (const Parcel& parcel : land.parcels) {
      if (parcel.owner == player) owned.push_back(parcel.parcel_id);
    }
    std::vector<ParcelId> order = owned;
    std::stable_sort(order.begin(), order.end(), [&](ParcelId a, ParcelId b) {
      return land.parcels[a].agri_revenue < land.parcels[b].agri_revenue;
    });
    Ecopoints production = production_of(land, owned, rules);
    for (ParcelId id : order) {
      if (production >= rules.obligation) break;
      Parcel& parcel = land.parcels[static_cast<std::size_t>(id)];
      // Gain = the parcel's own credits plus one bonus for each conserved
      // neighbor this player owns.
      production += parcel.base_credit;
      for_each_neighbor(land, rules.neighborhood, parcel.coord, [&](const Parcel& nb) {
        if (nb.land_use != LandUse::Conservation) return;
        production += rules.bonus_weight;
        if (nb.owner == player) production += rules.bonus_weight;
      });
      parcel.land_use = LandUse::Conservation;
    }
  }
  return land;
}

struct PlayerSeat {
  PlayerId player_id = 0;
  std::string name;
  bool operator==(const PlayerSeat&) const = default;
};

/// Builds the Running state for a freshly started game.
inline GameState start_game(const GameRules& rules, std::span<const PlayerSeat> seats) {
  std::vector<PlayerId> ids;
  ids.reserve(seats.size());
  for (const PlayerSeat& s : seats) ids.push_back(s.player_id);
  GameState state;
  state.rules = rules;
  state.landscape = generate_landscape(rules, ids);
  for (const PlayerSeat& s : seats) {
    PlayerState ps;
    ps.player_id = s.player_id;
    ps.name = s.name;
    ps.cash = rules.initial_cash;
    state.players.push_back(std::move(ps));
  }
  for (const Parcel& parcel : state.landscape.parcels) {
    state.player(parcel.owner).owned_parcels.push_back(parcel.parcel_id);
  }
  state.tick = 0;
  state.phase = Phase::Running;
  return state;
}

// ---------------------------------------------------------------------------
// Mutations.

enum class ChangeOutcome : std::uint8_t { Applied, NoOp };

/// Rejects (WouldViolateOwnObligation) any change after which the acting
/// player's effective balance is below the obligation; other players may be
/// pushed below theirs.
inline ChangeOutcome apply_land_use_change(GameState& state, PlayerId player, ParcelId parcel_id,
                                           LandUse new_use) {
  if (state.phase != Phase::Running) throw Error(ErrorCode::GameNotRunning);
  state.player(player);
  Parcel& parcel = state.landscape.at(parcel_id);
  if (parcel.owner != player) {
    throw Error(ErrorCode::NotOwner, "parcel " + std::to_string(parcel_id));
  }
  if (parcel.land_use == new_use) return ChangeOutcome::NoOp;

  const LandUse previous = parcel.land_use;
  parcel.land_use = new_use;
  const Ecopoints balance = effective_balance(state, player);
  if (balance < state.rules.obligation) {
    parcel.land_use = previous;
    throw Error(ErrorCode::WouldViolateOwnObligation,
                "balance would be " + std::to_string(balance) + " against obligation " +
                    std::to_string(state.rules.obligation));
  }
  return ChangeOutcome::Applied;
}

struct TickEntry {
  PlayerId player_id = 0;
  Money revenue = 0;
  Money penalty = 0;
  Ecopoints shortfall = 0;
  Ecopoints production = 0;
  Ecopoints net_traded = 0;
  Money cash = 0;  // after accrual
  bool operator==(const TickEntry&) const = default;
};

struct TickSummary {
  std::int64_t tick = 0;  // tick number just completed, 1-based
  std::vector<TickEntry> entries;
  bool finished = false;
};

inline TickSummary accrue_tick(GameState& state) {
  if (state.phase != Phase::Running) throw Error(ErrorCode::GameNotRunning);
  TickSummary summary;
  summary.entries.reserve(state.players.size());
  for (const PlayerState& p : state.players) {
    TickEntry e;
    e.player_id = p.player_id;
    for (ParcelId id : p.owned_parcels) {
      const Parcel& parcel = state.landscape.parcels[static_cast<std::size_t>(id)];
      if (parcel.land_use == LandUse::Agriculture) e.revenue += parcel.agri_revenue;
    }
    e.production = production_of(state.landscape, p.owned_parcels, state.rules);
    e.net_traded = p.net_traded;
    e.shortfall = std::max<Ecopoints>(0, state.rules.obligation - (e.production + e.net_traded));
    e.penalty = state.rules.penalty_rate * e.shortfall;
    summary.entries.push_back(e);
  }
  for (std::size_t i = 0; i < state.players.size(); ++i) {
    TickEntry& e = summary.entries[i];
    state.players[i].cash += e.revenue - e.penalty;
    e.cash = state.players[i].cash;
  }
  state.tick += 1;
  if (state.tick >= state.rules.total_ticks) state.phase = Phase::Finished;
  summary.tick = state.tick;
  summary.finished = state.phase == Phase::Finished;
  return summary;
}

struct Score {
  PlayerId player_id = 0;
  Money cash = 0;
  bool operator==(const Score&) const = default;
};

inline std::vector<Score> final_scores(const GameState& state) {
  if (state.phase != Phase::Finished) throw Error(ErrorCode::GameNotFinished);
  std::vector<Score> scores;
  for (const PlayerState& p : state.players) scores.push_back({p.player_id, p.cash});
  std::sort(scores.begin(), scores.end(), [](const Score& a, const Score& b) {
    if (a.cash != b.cash) return a.cash > b.cash;
    return a.player_id < b.player_id;
  });
  return scores;
}

}  // namespace ecotrade
