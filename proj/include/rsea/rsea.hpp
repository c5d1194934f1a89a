#ifndef RSEA_RSEA_HPP
#define RSEA_RSEA_HPP

#include "rsea/backends.hpp"
#include "rsea/errors.hpp"
#include "rsea/evalkit.hpp"
#include "rsea/problems.hpp"
#include "rsea/prompting.hpp"
#include "rsea/relation_data.hpp"
#include "rsea/rlkit.hpp"
#include "rsea/runio.hpp"
#include "rsea/saea.hpp"
#include "rsea/types.hpp"
#include "rsea/voting.hpp"

#endif // RSEA_RSEA_HPP
