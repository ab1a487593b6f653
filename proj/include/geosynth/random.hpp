// Copyright 2026 The Geosynth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace geosynth {

using Rng = std::mt19937_64;

// Engine for an independent stream identified by (seed, stream...). Streams
// with different identifiers are decorrelated through std::seed_seq.
Rng make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> ids);

// Uniform draw on the open interval (0, 1) using 53 random bits.
double uniform_open(Rng& rng);

// Standard normal draw by inversion of one uniform_open() draw; consumes
// exactly one engine output so streams stay aligned across platforms.
double standard_normal(Rng& rng);

double normal_cdf(double z);
// Upper tail 1 - normal_cdf(z), accurate far into the tail.
double normal_sf(double z);
double normal_quantile(double p);

}  // namespace geosynth
