package demo.util;

public final class ArrayUtils {

    private ArrayUtils() {
    }

    /**
     * Sorts the array in place using bubble sort.
     */
    public static void bubbleSort(int[] arr) {
        int len = arr.length;
        for (int i = 0; i < len - 1; i++) {
            for (int j = 0; j < len - 1 - i; j++) {
                if (arr[j] > arr[j + 1]) {
                    int temp = arr[j];
                    arr[j] = arr[j + 1];
                    arr[j + 1] = temp;
                }
            }
        }
    }

    // shift the first element of the array to the end
    public static void shiftFirstElement(int[] array) {
        if (array.length == 0) {
            return;
        }
        int first = array[0];
        System.arraycopy(array, 1, array, 0, array.length - 1);
        array[array.length - 1] = first;
    }

    /** Returns the maximum value in the array. */
    public static int maxValue(int[] values) {
        int max = values[0];
        for (int value : values) {
            if (value > max) {
                max = value;
            }
        }
        return max;
    }
}
