#pragma once

// Results export for offline analysis: a per-tick panel and the trade table,
// both comma-separated with a header row.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "ecotrade/session.hpp"

namespace ecotrade {

inline constexpr std::string_view kPanelHeader =
    "tick,player_id,cash,production,net_traded,shortfall,penalty,revenue";
inline constexpr std::string_view kTradesHeader = "seq,tick_at,seller,buyer,quantity,unit_price";

inline std::string panel_csv(const SessionState& s) {
  std::ostringstream out;
  out << kPanelHeader << '\n';
  for (const PanelRow& r : s.panel) {
    out << r.tick << ',' << r.player_id << ',' << r.cash << ',' << r.production << ','
        << r.net_traded << ',' << r.shortfall << ',' << r.penalty << ',' << r.revenue << '\n';
  }
  return out.str();
}

inline std::string trades_csv(const SessionState& s) {
  std::ostringstream out;
  out << kTradesHeader << '\n';
  for (const Trade& t : s.world.market.trades) {
    out << t.seq << ',' << t.tick_at << ',' << t.seller << ',' << t.buyer << ',' << t.quantity
        << ',' << t.unit_price << '\n';
  }
  return out.str();
}

struct ExportPaths {
  std::filesystem::path panel;
  std::filesystem::path trades;
};

/// Writes panel.csv and trades.csv into `dir` (created if missing).
inline ExportPaths export_results(const SessionState& s, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, dir.string() + ": " + ec.message());
  ExportPaths paths{dir / "panel.csv", dir / "trades.csv"};
  auto write = [](const std::filesystem::path& p, const std::string& body) {
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    f << body;
    f.close();
    if (!f) throw Error(ErrorCode::IoFailure, "cannot write " + p.string());
  };
  write(paths.panel, panel_csv(s));
  write(paths.trades, trades_csv(s));
  return paths;
}

}  // namespace ecotrade
