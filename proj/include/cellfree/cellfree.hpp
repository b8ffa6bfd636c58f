// SPDX-License-Identifier: Apache-2.0
//
// cellfree-sim: link-level simulator for the cell-free massive MIMO downlink
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

#include "cellfree/channel.hpp"
#include "cellfree/estimation.hpp"
#include "cellfree/io.hpp"
#include "cellfree/matrix.hpp"
#include "cellfree/montecarlo.hpp"
#include "cellfree/power_control.hpp"
#include "cellfree/rates.hpp"
#include "cellfree/rng.hpp"
#include "cellfree/scenario.hpp"
#include "cellfree/version.hpp"
