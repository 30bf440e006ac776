#pragma once

// Umbrella header. HTTP providers live in chartfi/http_provider.hpp and
// chartfi/provider_factory.hpp, which additionally need OpenSSL::SSL.

#include "chartfi/config.hpp"
#include "chartfi/core_model.hpp"
#include "chartfi/error.hpp"
#include "chartfi/extraction.hpp"
#include "chartfi/harness.hpp"
#include "chartfi/informativeness.hpp"
#include "chartfi/judge.hpp"
#include "chartfi/matching.hpp"
#include "chartfi/prompts.hpp"
#include "chartfi/providers.hpp"
#include "chartfi/textmetrics.hpp"
