#include "emitron/parallel.h"
#include "emitron/csv.h"

#include <cstdlib>

namespace emitron {

unsigned default_thread_count()
{
    if (const char* env = std::getenv("EMITRON_THREADS"); env != nullptr) {
        if (auto value = parse_int(env); value.has_value() && *value > 0) {
            return static_cast<unsigned>(*value);
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

}
