// Copyright 2026 The ilba-cpp Authors
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

#ifndef ILBA_ILBA_HPP_
#define ILBA_ILBA_HPP_

#include "ilba/aggregate.hpp"   // IWYU pragma: export
#include "ilba/audit.hpp"       // IWYU pragma: export
#include "ilba/csv.hpp"         // IWYU pragma: export
#include "ilba/error.hpp"       // IWYU pragma: export
#include "ilba/finest_table.hpp"  // IWYU pragma: export
#include "ilba/masking.hpp"     // IWYU pragma: export
#include "ilba/microdata.hpp"   // IWYU pragma: export
#include "ilba/rng.hpp"         // IWYU pragma: export
#include "ilba/synth.hpp"       // IWYU pragma: export

#endif  // ILBA_ILBA_HPP_
