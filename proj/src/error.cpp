// Copyright 2026 The chartens Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "chartens/error.hpp"

namespace chartens {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::EmptyOutput: return "EmptyOutput";
    case ErrorKind::ParseFailure: return "ParseFailure";
    case ErrorKind::EmptyEnsemble: return "EmptyEnsemble";
    case ErrorKind::NoValidSamples: return "NoValidSamples";
    case ErrorKind::TransportError: return "TransportError";
    case ErrorKind::AuthError: return "AuthError";
    case ErrorKind::RateLimited: return "RateLimited";
    case ErrorKind::MalformedResponse: return "MalformedResponse";
    case ErrorKind::NoMatchedPairs: return "NoMatchedPairs";
    case ErrorKind::EmptyCorpus: return "EmptyCorpus";
    case ErrorKind::MissingTruth: return "MissingTruth";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::UnknownAxis: return "UnknownAxis";
    case ErrorKind::InsufficientSeries: return "InsufficientSeries";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace chartens
