// Copyright 2026 The qbc-sim Authors
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

#include "qbc/adversary.hpp"
#include "qbc/analysis.hpp"
#include "qbc/error.hpp"
#include "qbc/kernel.hpp"
#include "qbc/lincode.hpp"
#include "qbc/protocol.hpp"
#include "qbc/registers.hpp"
#include "qbc/rng.hpp"
#include "qbc/transcript_io.hpp"
#include "qbc/window.hpp"
