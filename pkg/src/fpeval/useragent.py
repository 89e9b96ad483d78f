"""Browser- and OS-family classification from User-Agent strings.

Substring rules, byte-exact and case-sensitive for browser tokens:
Firefox wins when "Firefox/" appears without "Seamonkey"; Chrome wins when
"Chrome/" appears without any of "Chromium", "Edge", "OPR". Everything else
is "other". The OS rules map onto the three desktop families and send
anything ambiguous (including Android, which advertises Linux) to "other".
"""

from __future__ import annotations

from typing import Literal

BrowserFamily = Literal["chrome", "firefox", "other"]
OsFamily = Literal["windows", "mac", "linux", "other"]

_CHROME_DISQUALIFIERS = ("Chromium", "Edge", "OPR")


def browser_family(user_agent: str) -> BrowserFamily:
    if "Firefox/" in user_agent and "Seamonkey" not in user_agent:
        return "firefox"
    if "Chrome/" in user_agent and not any(t in user_agent for t in _CHROME_DISQUALIFIERS):
        return "chrome"
    return "other"


def os_family(user_agent: str) -> OsFamily:
    if "Windows" in user_agent:
        return "windows"
    if "Macintosh" in user_agent or "Mac OS X" in user_agent:
        return "mac"
    if ("Linux" in user_agent or "X11" in user_agent) and "Android" not in user_agent:
        return "linux"
    return "other"
