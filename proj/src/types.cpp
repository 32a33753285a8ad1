#include "somno/types.hpp"

namespace somno {

const char* stage_name(SleepStage stage) {
  switch (stage) {
    case SleepStage::Wake: return "W";
    case SleepStage::N1: return "N1";
    case SleepStage::N2: return "N2";
    case SleepStage::N3: return "N3";
    case SleepStage::Rem: return "REM";
    case SleepStage::Excluded: return "Excluded";
  }
  return "?";
}

}  // namespace somno
