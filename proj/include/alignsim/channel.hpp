// SPDX-License-Identifier: Apache-2.0
//
// alignsim - Monte Carlo simulator for interference alignment with analog CSI feedback
// Copyright (C) 2026 the alignsim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include "config.hpp"
#include "rng.hpp"
#include "util.hpp"

namespace alignsim {

// One block-fading realization. H[i][k] is the Nr x Nt forward channel from
// source k to sink i; G[k][i] is the Nt x Nr reverse channel from sink k to
// source i. All entries i.i.d. CN(0,1), no pathloss or correlation. The seed
// of the stream that produced the draw is kept for provenance.
struct ChannelRealization {
    ChannelSet H;
    ChannelSet G;
    std::uint64_t seed = 0;

    int users() const { return static_cast<int>(H.size()); }
    int nr() const { return static_cast<int>(H.at(0).at(0).rows()); }
    int nt() const { return static_cast<int>(H.at(0).at(0).cols()); }
};

// Draw order is fixed (H by sink then source, then G likewise, entries row by
// row), so a given stream state always yields the same realization.
inline ChannelRealization draw_channels(const NetworkConfig& cfg, RngStream& rng) {
    ChannelRealization ch;
    ch.seed = rng.seed();
    ch.H.resize(cfg.K);
    ch.G.resize(cfg.K);
    for (int i = 0; i < cfg.K; ++i) {
        ch.H[i].resize(cfg.K);
        for (int k = 0; k < cfg.K; ++k) ch.H[i][k] = rng.cgaussian_matrix(cfg.Nr, cfg.Nt);
    }
    for (int k = 0; k < cfg.K; ++k) {
        ch.G[k].resize(cfg.K);
        for (int i = 0; i < cfg.K; ++i) ch.G[k][i] = rng.cgaussian_matrix(cfg.Nt, cfg.Nr);
    }
    return ch;
}

}  // namespace alignsim
