#!/usr/bin/env python3
"""Regenerate the bundled demo dataset at crates/permsentry/data/dataset.csv.

398 apps, 330 binary static features (permissions, API calls, shell
command fragments), balanced classes. The generative model plants a
recoverable signal: a block of malware-indicator features, a block of
benign-indicator features, six correlated feature groups driven by
latent factors (so PCA has structure to find), background noise
everywhere else, and 5% label flips so no classifier can reach 100%.

Run from the repository root:  python3 tools/gen_dataset.py
"""

import os
import random

OUT = os.path.join(
    os.path.dirname(__file__), "..", "crates", "permsentry", "data", "dataset.csv"
)

PERMISSION_BASES = [
    "INTERNET", "READ_PHONE_STATE", "SEND_SMS", "RECEIVE_SMS", "READ_SMS",
    "WRITE_SMS", "ACCESS_NETWORK_STATE", "ACCESS_WIFI_STATE", "READ_CONTACTS",
    "WRITE_CONTACTS", "CALL_PHONE", "READ_CALL_LOG", "WRITE_CALL_LOG",
    "ACCESS_FINE_LOCATION", "ACCESS_COARSE_LOCATION", "CAMERA",
    "RECORD_AUDIO", "WRITE_EXTERNAL_STORAGE", "READ_EXTERNAL_STORAGE",
    "RECEIVE_BOOT_COMPLETED", "WAKE_LOCK", "VIBRATE", "GET_ACCOUNTS",
    "GET_TASKS", "SYSTEM_ALERT_WINDOW", "INSTALL_PACKAGES",
    "DELETE_PACKAGES", "RESTART_PACKAGES", "KILL_BACKGROUND_PROCESSES",
    "CHANGE_WIFI_STATE", "CHANGE_NETWORK_STATE", "BLUETOOTH",
    "BLUETOOTH_ADMIN", "NFC", "READ_HISTORY_BOOKMARKS",
    "WRITE_HISTORY_BOOKMARKS", "READ_CALENDAR", "WRITE_CALENDAR",
    "PROCESS_OUTGOING_CALLS", "MODIFY_AUDIO_SETTINGS", "READ_LOGS",
    "WRITE_SETTINGS", "WRITE_SECURE_SETTINGS", "DISABLE_KEYGUARD",
    "EXPAND_STATUS_BAR", "FLASHLIGHT", "MODIFY_PHONE_STATE",
    "MOUNT_UNMOUNT_FILESYSTEMS", "READ_PROFILE", "READ_SOCIAL_STREAM",
    "READ_SYNC_SETTINGS", "WRITE_SYNC_SETTINGS", "RECEIVE_MMS",
    "RECEIVE_WAP_PUSH", "SET_WALLPAPER", "SET_ALARM", "USE_CREDENTIALS",
    "AUTHENTICATE_ACCOUNTS", "MANAGE_ACCOUNTS", "BROADCAST_STICKY",
    "CHANGE_CONFIGURATION", "CLEAR_APP_CACHE", "DEVICE_POWER",
    "DUMP", "PERSISTENT_ACTIVITY", "REORDER_TASKS", "SET_DEBUG_APP",
    "SET_PROCESS_LIMIT", "SET_TIME_ZONE", "SUBSCRIBED_FEEDS_READ",
    "SUBSCRIBED_FEEDS_WRITE", "TRANSMIT_IR", "UPDATE_DEVICE_STATS",
    "USE_SIP", "BIND_DEVICE_ADMIN", "BATTERY_STATS", "BIND_WALLPAPER",
    "BODY_SENSORS", "BROADCAST_SMS", "BROADCAST_WAP_PUSH",
    "CAPTURE_AUDIO_OUTPUT", "CHANGE_WIFI_MULTICAST_STATE",
    "GLOBAL_SEARCH", "MASTER_CLEAR", "MEDIA_CONTENT_CONTROL",
    "REBOOT", "SET_ANIMATION_SCALE", "SET_TIME", "STATUS_BAR",
    "ACCESS_LOCATION_EXTRA_COMMANDS", "ACCESS_MOCK_LOCATION",
    "ACCOUNT_MANAGER", "ADD_VOICEMAIL", "BIND_ACCESSIBILITY_SERVICE",
    "BIND_APPWIDGET", "BIND_INPUT_METHOD", "BIND_NFC_SERVICE",
    "BIND_NOTIFICATION_LISTENER_SERVICE", "BIND_PRINT_SERVICE",
    "BIND_TEXT_SERVICE", "BIND_VPN_SERVICE", "BLUETOOTH_PRIVILEGED",
    "CALL_PRIVILEGED", "CONTROL_LOCATION_UPDATES", "DIAGNOSTIC",
    "FACTORY_TEST", "FORCE_BACK", "HARDWARE_TEST", "INJECT_EVENTS",
    "INTERNAL_SYSTEM_WINDOW", "LOCATION_HARDWARE", "MANAGE_APP_TOKENS",
    "MANAGE_DOCUMENTS", "READ_FRAME_BUFFER", "READ_INPUT_STATE",
    "SEND_RESPOND_VIA_MESSAGE", "SET_ACTIVITY_WATCHER",
    "SET_ALWAYS_FINISH", "SET_ORIENTATION", "SET_POINTER_SPEED",
    "SET_PREFERRED_APPLICATIONS", "SET_WALLPAPER_HINTS",
    "SIGNAL_PERSISTENT_PROCESSES", "UPDATE_LOCK", "WRITE_APN_SETTINGS",
    "WRITE_GSERVICES", "WRITE_PROFILE", "WRITE_SOCIAL_STREAM",
    "ACCESS_SUPERUSER", "BRICK", "CHANGE_COMPONENT_ENABLED_STATE",
    "INTERACT_ACROSS_USERS", "MANAGE_USERS", "READ_USER_DICTIONARY",
    "WRITE_USER_DICTIONARY",
]

VENDOR_PERMISSIONS = [
    "com.google.android.c2dm.permission.RECEIVE",
    "com.android.launcher.permission.INSTALL_SHORTCUT",
    "com.android.launcher.permission.UNINSTALL_SHORTCUT",
    "com.android.browser.permission.READ_HISTORY_BOOKMARKS",
    "com.android.browser.permission.WRITE_HISTORY_BOOKMARKS",
    "com.android.vending.permission.BILLING",
    "com.android.alarm.permission.SET_ALARM",
    "com.google.android.providers.gsf.permission.READ_GSERVICES",
    "com.android.voicemail.permission.ADD_VOICEMAIL",
    "com.sec.android.provider.badge.permission.READ",
    "com.sec.android.provider.badge.permission.WRITE",
    "com.htc.launcher.permission.READ_SETTINGS",
    "com.htc.launcher.permission.UPDATE_SHORTCUT",
    "com.motorola.launcher.permission.INSTALL_SHORTCUT",
    "com.google.android.gm.permission.READ_CONTENT_PROVIDER",
]

API_CALLS = [
    "getDeviceId", "getSubscriberId", "getSimSerialNumber",
    "getSimOperator", "getSimCountryIso", "getNetworkOperator",
    "getLine1Number", "getCellLocation", "getCallState",
    "sendTextMessage", "sendMultipartTextMessage", "sendDataMessage",
    "getDefault", "createFromPdu", "getMessageBody",
    "getOriginatingAddress", "abortBroadcast", "getRunningTasks",
    "getRunningServices", "getRunningAppProcesses",
    "killBackgroundProcesses", "getInstalledPackages",
    "getInstalledApplications", "getPackageInfo", "getApplicationInfo",
    "setComponentEnabledSetting", "getLastKnownLocation",
    "requestLocationUpdates", "getLatitude", "getLongitude",
    "getAccounts", "getAccountsByType", "getMacAddress",
    "getConnectionInfo", "getActiveNetworkInfo", "setWifiEnabled",
    "getNetworkInfo", "isConnected", "openConnection",
    "getInputStream", "getOutputStream", "connect", "execute",
    "openStream", "getContent", "getResponseCode", "setRequestMethod",
    "setRequestProperty", "getHostAddress", "getByName",
    "loadClass", "loadLibrary", "loadDex", "defineClass",
    "getClassLoader", "forName", "getMethod", "getDeclaredMethod",
    "invoke", "newInstance", "getRuntime", "exec", "waitFor",
    "getSystemService", "registerReceiver", "sendBroadcast",
    "startService", "stopService", "bindService", "startActivity",
    "getContentResolver", "query", "insert", "update", "delete",
    "openFileOutput", "openFileInput", "getExternalStorageDirectory",
    "getExternalStorageState", "getFilesDir", "getCacheDir",
    "createNewFile", "mkdirs", "renameTo", "listFiles",
    "getAbsolutePath", "deleteFile", "setReadable", "setExecutable",
    "getBytes", "toByteArray", "doFinal", "getInstance",
    "generateKey", "getEncoded", "encodeToString", "decode",
    "encrypt", "decrypt", "digest", "getMessageDigest",
    "currentTimeMillis", "getProperty", "getenv", "availableProcessors",
    "notify", "cancel", "setLatestEventInfo", "addAction",
    "setPriority", "onReceive", "onStartCommand", "onBind",
    "schedule", "scheduleAtFixedRate", "postDelayed", "setRepeating",
    "acquireWakeLock", "releaseWakeLock", "vibrate", "setStreamVolume",
    "takePicture", "startRecording", "stopRecording", "setAudioSource",
    "getContactsContract", "getDisplayOriginatingAddress",
    "getSmsBody", "getAllMessagesFromIcc", "deleteMessage",
    "setFlags", "addFlags", "setDataAndType", "putExtra",
    "getStringExtra", "getIntent", "getAction", "getExtras",
    "requestWindowFeature", "setWallpaper", "clearWallpaper",
    "getSsid", "getBssid", "getIpAddress", "getDhcpInfo",
    "getNetworkType", "getPhoneType", "isNetworkRoaming",
    "getVoiceMailNumber", "getDeviceSoftwareVersion",
]

COMMANDS = [
    "/system/bin/sh", "/system/bin/su", "/system/xbin/su",
    "/system/app", "/system/bin/pm", "/data/local/tmp",
    "/data/data", "/proc/net/tcp", "/sys/class/net",
    "/system/bin/chmod", "/system/bin/mount", "/dev/socket",
    "pminstall", "pmuninstall", "pmdisable", "pmlist",
    "chmod777", "chmod755", "chown", "mount-oremountrw",
    "killall", "rm-rf", "cat/proc/version", "ps-ef",
    "GET-PROPERTIES", "GET-TASKS", "insmod", "mkpartfs",
    "ifconfig", "netstat",
]


def feature_names():
    perms = ["android.permission." + p for p in PERMISSION_BASES]
    perms += VENDOR_PERMISSIONS
    names = perms + API_CALLS + COMMANDS
    assert len(names) == len(set(names)), "duplicate feature names"
    return names


# indices into the final name list (permissions 0..134, apis 135..299,
# commands 300..329 given the list sizes above)
def plan(names):
    idx = {n: i for i, n in enumerate(names)}
    mal_indicators = [idx[n] for n in [
        "android.permission.SEND_SMS",
        "android.permission.READ_SMS",
        "android.permission.RECEIVE_SMS",
        "android.permission.READ_PHONE_STATE",
        "android.permission.INSTALL_PACKAGES",
        "android.permission.SYSTEM_ALERT_WINDOW",
        "android.permission.RECEIVE_BOOT_COMPLETED",
        "android.permission.MOUNT_UNMOUNT_FILESYSTEMS",
        "getDeviceId",
        "getSubscriberId",
        "getSimSerialNumber",
        "sendTextMessage",
        "abortBroadcast",
        "createFromPdu",
        "getRunningTasks",
        "loadDex",
        "exec",
        "/system/bin/su",
        "chmod777",
        "pminstall",
    ]]
    ben_indicators = [idx[n] for n in [
        "android.permission.VIBRATE",
        "android.permission.SET_WALLPAPER",
        "android.permission.NFC",
        "android.permission.BLUETOOTH",
        "com.android.vending.permission.BILLING",
        "setWallpaper",
        "takePicture",
        "requestWindowFeature",
        "getSsid",
        "setStreamVolume",
    ]]
    group_features = [
        ["android.permission.ACCESS_FINE_LOCATION",
         "android.permission.ACCESS_COARSE_LOCATION",
         "getLastKnownLocation", "requestLocationUpdates",
         "getLatitude"],
        ["android.permission.READ_CONTACTS",
         "getContentResolver", "query",
         "getContactsContract", "getAccounts"],
        ["openConnection", "getInputStream", "getResponseCode",
         "setRequestMethod", "openStream"],
        ["android.permission.CAMERA", "android.permission.RECORD_AUDIO",
         "startRecording", "setAudioSource", "stopRecording"],
        ["doFinal", "getInstance", "generateKey",
         "encodeToString", "digest"],
        ["android.permission.RECEIVE_MMS",
         "android.permission.RECEIVE_WAP_PUSH",
         "getMessageBody", "getOriginatingAddress",
         "getDisplayOriginatingAddress"],
    ]
    groups = [[idx[n] for n in g] for g in group_features]
    return mal_indicators, ben_indicators, groups


def main():
    rng = random.Random(20260824)
    names = feature_names()
    d = len(names)
    assert d == 330, d
    mal_idx, ben_idx, groups = plan(names)
    special = set(mal_idx) | set(ben_idx) | {i for g in groups for i in g}

    # per-class latent factor rates for the correlated groups
    group_rate = [(0.15, 0.75), (0.45, 0.50), (0.55, 0.80),
                  (0.25, 0.45), (0.20, 0.65), (0.10, 0.55)]
    # background rate per remaining feature, shared by both classes
    background = {
        j: rng.betavariate(0.7, 4.0) * 0.5
        for j in range(d) if j not in special
    }

    n_per_class = 199
    rows = []
    for truth in [0, 1] * n_per_class:
        row = [0] * d
        for j in mal_idx:
            row[j] = 1 if rng.random() < (0.82 if truth else 0.08) else 0
        for j in ben_idx:
            row[j] = 1 if rng.random() < (0.12 if truth else 0.68) else 0
        for g, (p_ben, p_mal) in zip(groups, group_rate):
            factor = rng.random() < (p_mal if truth else p_ben)
            for j in g:
                # feature follows the latent factor with 10% defection
                on = factor if rng.random() >= 0.10 else not factor
                row[j] = 1 if on else 0
        for j, p in background.items():
            row[j] = 1 if rng.random() < p else 0
        label = truth if rng.random() >= 0.05 else 1 - truth
        rows.append((row, label))

    os.makedirs(os.path.dirname(OUT), exist_ok=True)
    with open(OUT, "w") as f:
        f.write(",".join(names) + ",class\n")
        for row, label in rows:
            f.write(",".join(str(v) for v in row) + f",{label}\n")
    n_mal = sum(label for _, label in rows)
    print(f"wrote {len(rows)} rows x {d} features, {n_mal} malicious -> {os.path.normpath(OUT)}")


if __name__ == "__main__":
    main()
