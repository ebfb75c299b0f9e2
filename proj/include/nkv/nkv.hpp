#pragma once

#include "nkv/commands.hpp"
#include "nkv/core.hpp"
#include "nkv/error.hpp"
#include "nkv/estimate.hpp"
#include "nkv/expr.hpp"
#include "nkv/greens.hpp"
#include "nkv/majorant.hpp"
#include "nkv/problem.hpp"
#include "nkv/rootfind.hpp"
#include "nkv/schemes.hpp"
#include "nkv/sequence.hpp"
#include "nkv/theorem.hpp"
