#include "quarry/time.hpp"

#include <cstdio>

namespace quarry {

Timestamp now_utc() {
  return std::chrono::time_point_cast<std::chrono::milliseconds>(std::chrono::system_clock::now());
}

std::string format_rfc3339(Timestamp t) {
  using namespace std::chrono;
  auto day = floor<days>(t);
  year_month_day ymd{day};
  hh_mm_ss<milliseconds> tod{t - day};
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02ld:%02ld:%02lld.%03lldZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<long>(tod.hours().count()), static_cast<long>(tod.minutes().count()),
                static_cast<long long>(tod.seconds().count()), static_cast<long long>(tod.subseconds().count()));
  return buf;
}

std::optional<Timestamp> parse_rfc3339(std::string_view s) {
  using namespace std::chrono;
  int y, mo, d, h, mi;
  double sec;
  char tail[8] = {};
  std::string str(s);
  if (std::sscanf(str.c_str(), "%d-%d-%dT%d:%d:%lf%7s", &y, &mo, &d, &h, &mi, &sec, tail) < 6) return std::nullopt;
  year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  auto ms = static_cast<long long>(sec * 1000.0 + 0.5);
  Timestamp t = sys_days{ymd} + hours{h} + minutes{mi} + milliseconds{ms};
  std::string_view z(tail);
  if (z.size() >= 6 && (z[0] == '+' || z[0] == '-')) {
    int oh = 0, om = 0;
    if (std::sscanf(tail + 1, "%d:%d", &oh, &om) == 2) {
      auto off = hours{oh} + minutes{om};
      t = z[0] == '+' ? t - off : t + off;
    }
  }
  return t;
}

}  // namespace quarry
