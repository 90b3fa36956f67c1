#pragma once

// Brute-force forward kinematics straight from the model document, using
// plain 4x4 arrays and Rodrigues' formula. Shares no code with the library.

#include <array>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace oracle {

using Mat4 = std::array<std::array<double, 4>, 4>;

inline Mat4 identity() {
  Mat4 m{};
  for (int i = 0; i < 4; ++i) m[i][i] = 1.0;
  return m;
}

inline Mat4 mul(const Mat4& a, const Mat4& b) {
  Mat4 c{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      double s = 0.0;
      for (int k = 0; k < 4; ++k) s += a[i][k] * b[k][j];
      c[i][j] = s;
    }
  return c;
}

inline Mat4 rodrigues(std::array<double, 3> u, double angle) {
  const double n = std::sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
  for (auto& v : u) v /= n;
  const double c = std::cos(angle), s = std::sin(angle), t = 1.0 - c;
  Mat4 m = identity();
  m[0][0] = t * u[0] * u[0] + c;
  m[0][1] = t * u[0] * u[1] - s * u[2];
  m[0][2] = t * u[0] * u[2] + s * u[1];
  m[1][0] = t * u[0] * u[1] + s * u[2];
  m[1][1] = t * u[1] * u[1] + c;
  m[1][2] = t * u[1] * u[2] - s * u[0];
  m[2][0] = t * u[0] * u[2] - s * u[1];
  m[2][1] = t * u[1] * u[2] + s * u[0];
  m[2][2] = t * u[2] * u[2] + c;
  return m;
}

inline Mat4 origin(const nlohmann::json& o) {
  std::array<double, 3> xyz{0, 0, 0}, rpy{0, 0, 0};
  if (o.contains("xyz")) xyz = o["xyz"].get<std::array<double, 3>>();
  if (o.contains("rpy")) rpy = o["rpy"].get<std::array<double, 3>>();
  Mat4 r = mul(rodrigues({0, 0, 1}, rpy[2]), mul(rodrigues({0, 1, 0}, rpy[1]), rodrigues({1, 0, 0}, rpy[0])));
  r[0][3] = xyz[0];
  r[1][3] = xyz[1];
  r[2][3] = xyz[2];
  return r;
}

struct Model {
  nlohmann::json doc;
  std::map<std::string, nlohmann::json> by_name;
  std::map<std::string, std::string> producer;  // child link -> joint name

  explicit Model(nlohmann::json d) : doc(std::move(d)) {
    for (const auto& j : doc["joints"]) {
      by_name[j["name"]] = j;
      if (j["type"] == "revolute") producer[j["child"]] = j["name"];
    }
  }

  /// Joint names from the base frame to the tip of `chain`.
  std::vector<std::string> path(const std::string& chain) const {
    std::vector<std::string> own = doc["chains"][chain]["joints"].get<std::vector<std::string>>();
    std::vector<std::string> up;
    std::string link = by_name.at(own.front())["parent"];
    while (link != doc["base_frame"].get<std::string>()) {
      const std::string jn = producer.at(link);
      up.insert(up.begin(), jn);
      link = by_name.at(jn)["parent"];
    }
    up.insert(up.end(), own.begin(), own.end());
    return up;
  }

  Mat4 tip(const std::string& chain, const std::map<std::string, double>& q) const {
    Mat4 t = identity();
    for (const auto& name : path(chain)) {
      const auto& j = by_name.at(name);
      t = mul(t, origin(j["origin"]));
      t = mul(t, rodrigues(j["axis"].get<std::array<double, 3>>(), q.at(name)));
    }
    const auto& c = doc["chains"][chain];
    if (c.contains("tip")) t = mul(t, origin(c["tip"]));
    return t;
  }
};

}  // namespace oracle
