#pragma once

#include <Eigen/Dense>
#include <string_view>

namespace svpi {

using Field = Eigen::ArrayXd;

/// Uniform grid x_i = i * dx on [0, L].
struct Grid {
  int n = 0;
  double L = 0.0;
  double dx = 0.0;
  Field x;

  static Grid uniform(double L, int n);

  bool same_as(const Grid& other) const {
    return n == other.n && L == other.L;
  }
};

enum class ProfileRole { steady, quasi_static, target, state };

std::string_view to_string(ProfileRole role);

/// Space-sampled height/velocity pair on a Grid.
struct Profile {
  Grid grid;
  Field H;
  Field V;
  ProfileRole role = ProfileRole::state;

  Profile() = default;
  Profile(Grid g, Field h, Field v, ProfileRole r);

  static Profile uniform(const Grid& g, double h, double v,
                         ProfileRole r = ProfileRole::state);

  Field flux() const { return H * V; }
};

}  // namespace svpi
