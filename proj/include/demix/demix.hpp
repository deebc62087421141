// Copyright 2026 The Demix Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DEMIX_DEMIX_HPP
#define DEMIX_DEMIX_HPP

#include "demix/certificate.hpp"
#include "demix/coherence.hpp"
#include "demix/convex.hpp"
#include "demix/harness.hpp"
#include "demix/io.hpp"
#include "demix/operators.hpp"
#include "demix/types.hpp"
#include "demix/wirtinger.hpp"

#endif  // DEMIX_DEMIX_HPP
