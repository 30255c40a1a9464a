#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "annlab/core.hpp"

namespace annlab::bench {

/// Dataset plus queries, each with exactly one planted neighbor within r.
struct PlantedNeighbors {
  Dataset data;
  std::vector<Point> queries;
  std::vector<Neighbor> truth;  // planted point and its distance per query
};

/// Uniform bit vectors; query j flips exactly r bits of a distinct random
/// data point. Other points within r of a query are resampled, so the
/// planted point is the unique one within r (verified by brute force).
PlantedNeighbors planted_hamming(std::size_t n, std::size_t d, std::size_t r,
                                 std::size_t queries, std::uint64_t seed);

/// Every data point lies at Hamming distance exactly `far` from one query q;
/// used to measure candidate counts without any near point.
PlantedNeighbors hamming_shell(std::size_t n, std::size_t d, std::size_t far,
                               std::uint64_t seed);

/// Unit vectors, each at l2 distance exactly `far` from a single query.
PlantedNeighbors sphere_shell(std::size_t n, std::size_t d, double far, std::uint64_t seed);

/// Uniform unit vectors plus optional dense caps; query j is a unit vector at
/// distance exactly r from a distinct data point. Points within r of a query
/// other than the planted one are resampled.
PlantedNeighbors planted_sphere(std::size_t n, std::size_t d, double r, std::size_t queries,
                                std::size_t caps, double cap_fraction, double cap_cos,
                                std::uint64_t seed);

/// Points uniform in [0, side]^d under l-infinity; query j sits at
/// l-infinity distance exactly dist from a distinct data point.
PlantedNeighbors planted_linf(std::size_t n, std::size_t d, double side, double dist,
                              std::size_t queries, std::uint64_t seed);

/// Dense points with i.i.d. coordinates uniform in [0, side] under l1; query
/// j is at l1 distance exactly r from a distinct data point. Other points
/// within c*r of a query are resampled.
PlantedNeighbors planted_l1(std::size_t n, std::size_t d, double side, double r, double c,
                            std::size_t queries, std::uint64_t seed);

struct Caps {
  Dataset data;
  std::vector<int> labels;  // cap id, -1 for background
  std::vector<std::vector<double>> centers;
};

/// `caps` groups of size cap_fraction * n / caps around random unit centers
/// with <x, center> = cap_cos, the rest uniform on the sphere.
Caps planted_caps(std::size_t n, std::size_t d, std::size_t caps, double cap_fraction,
                  double cap_cos, std::uint64_t seed);

/// Closest-pair instance: one pair at distance <= r, every other pair above
/// c * r (verified by an exhaustive scan).
struct PlantedPair {
  Dataset data;
  std::size_t first = 0;
  std::size_t second = 0;
  double distance = 0.0;
};

PlantedPair planted_pair_hamming(std::size_t n, std::size_t d, std::size_t r, double c,
                                 std::uint64_t seed);

/// Unit vectors with one pair at l2 distance r and all other pairs above c*r.
PlantedPair planted_pair_sphere(std::size_t n, std::size_t d, double r, double c,
                                std::uint64_t seed);

/// n sign vectors in {+1,-1}^d / sqrt(d), stored as bits (1 = +1). One pair
/// has inner product exactly 1 - 2*planted_flips/d; all others have
/// |<x,y>| <= theta (verified exhaustively). Throws DataError if the random
/// background violates theta after a few attempts.
struct SignInstance {
  std::size_t d = 0;
  std::vector<BitVector> signs;
  std::size_t first = 0;
  std::size_t second = 0;
  double planted_ip = 0.0;
  double max_background_ip = 0.0;
};

SignInstance planted_sign_ip(std::size_t n, std::size_t d, std::size_t planted_flips,
                             double theta, std::uint64_t seed);

/// Inner product of two sign vectors.
double sign_ip(const BitVector& a, const BitVector& b);

}  // namespace annlab::bench
