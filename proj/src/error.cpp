/* Copyright 2026 The vlprep Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "vlprep/error.hpp"

namespace vlprep {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidImageExtent: return "InvalidImageExtent";
    case Errc::CoordinateOutOfRange: return "CoordinateOutOfRange";
    case Errc::UnboundRef: return "UnboundRef";
    case Errc::OrphanRegion: return "OrphanRegion";
    case Errc::MalformedRegion: return "MalformedRegion";
    case Errc::UnbalancedTags: return "UnbalancedTags";
    case Errc::IncompleteRecord: return "IncompleteRecord";
    case Errc::EmptyGroup: return "EmptyGroup";
    case Errc::MissingField: return "MissingField";
    case Errc::EmptyDialogue: return "EmptyDialogue";
    case Errc::RoleOrderViolation: return "RoleOrderViolation";
    case Errc::InvalidSegment: return "InvalidSegment";
    case Errc::SpanAlignmentError: return "SpanAlignmentError";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::InvalidWidth: return "InvalidWidth";
    case Errc::ShapeError: return "ShapeError";
    case Errc::NumericalError: return "NumericalError";
    case Errc::StepOutOfRange: return "StepOutOfRange";
    case Errc::InvalidDepth: return "InvalidDepth";
    case Errc::InvalidResolution: return "InvalidResolution";
    case Errc::IOFailure: return "IOFailure";
    case Errc::RecordError: return "RecordError";
  }
  return "Unknown";
}

}  // namespace vlprep
